//! Monte Carlo estimators matched to the closed forms in [`crate::theory`].
//!
//! Block-maxima probabilities are replication proportions with binomial
//! standard errors. The extremal index is the ratio of log probabilities
//! with a delta-method error. Tail dependence at a fixed level `u` is
//! `2 - log Ĉ_n(u, u) / log u` on the empirical copula, with a bootstrap
//! standard error.

use std::io;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::stream;
use crate::simulate::{block_maxima, stationary_samples, BlockMaxima, SimConfig};
use crate::theory::{M5Model, TauVector, TheoryError};

/// `|z|` above this fails verification.
pub const Z_GATE: f64 = 4.0;
/// Threshold used for the "other" components when estimating a marginal
/// extremal index through the multivariate one.
pub const DEGENERATE_TAU: f64 = 1e-6;
/// First stream id for bootstrap resamples.
pub const BOOTSTRAP_STREAM_BASE: u64 = 1 << 41;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("no replications or samples supplied")]
    EmptyInput,
    #[error("estimated probabilities dep = {dep}, iid = {iid} must lie strictly inside (0, 1)")]
    DegenerateProb { dep: f64, iid: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad component pair ({0}, {1})")]
    BadIndices(usize, usize),
    #[error("level {0} must lie strictly inside (0, 1)")]
    BadLevel(f64),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sequence {
    /// Maxima of the dependent path.
    Dependent,
    /// Maxima of the associated i.i.d. sequence.
    Iid,
}

/// Proportion of replications with `M_{n,j} <= n / tau_j` for every `j`.
pub fn empirical_limit_prob(
    maxima: &[BlockMaxima],
    n: usize,
    tau: &TauVector,
    which: Sequence,
) -> Result<Estimate, EstimateError> {
    if maxima.is_empty() {
        return Err(EstimateError::EmptyInput);
    }
    let thresholds: Vec<f64> = tau.as_slice().iter().map(|t| n as f64 / t).collect();
    let mut hits = 0usize;
    for bm in maxima {
        let m = match which {
            Sequence::Dependent => &bm.m_dep,
            Sequence::Iid => &bm.m_iid,
        };
        if m.len() != thresholds.len() {
            return Err(EstimateError::DimensionMismatch {
                expected: thresholds.len(),
                got: m.len(),
            });
        }
        if m.iter().zip(&thresholds).all(|(x, u)| x <= u) {
            hits += 1;
        }
    }
    let reps = maxima.len() as f64;
    let p = hits as f64 / reps;
    Ok(Estimate {
        value: p,
        se: (p * (1.0 - p) / reps).sqrt(),
    })
}

/// `log p_dep / log p_iid` with a delta-method standard error; the two
/// proportions come from independent draws.
pub fn empirical_extremal_index(
    maxima: &[BlockMaxima],
    n: usize,
    tau: &TauVector,
) -> Result<Estimate, EstimateError> {
    let dep = empirical_limit_prob(maxima, n, tau, Sequence::Dependent)?;
    let iid = empirical_limit_prob(maxima, n, tau, Sequence::Iid)?;
    let inside = |p: f64| p > 0.0 && p < 1.0;
    if !inside(dep.value) || !inside(iid.value) {
        return Err(EstimateError::DegenerateProb {
            dep: dep.value,
            iid: iid.value,
        });
    }
    let (ld, li) = (dep.value.ln(), iid.value.ln());
    let d_dep = 1.0 / (dep.value * li);
    let d_iid = -ld / (iid.value * li * li);
    Ok(Estimate {
        value: ld / li,
        se: ((d_dep * dep.se).powi(2) + (d_iid * iid.se).powi(2)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    pub bootstrap_resamples: usize,
    /// Levels with fewer joint exceedances than this are dropped.
    pub min_joint_exceedances: usize,
    pub seed: u64,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions {
            bootstrap_resamples: 200,
            min_joint_exceedances: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailLevel {
    pub u: f64,
    pub estimate: f64,
    pub se: f64,
    pub joint_exceedances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroppedLevel {
    pub u: f64,
    pub joint_exceedances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailDependenceEstimate {
    pub levels: Vec<TailLevel>,
    pub dropped: Vec<DroppedLevel>,
}

/// Zero-based ranks of `xs`, ties broken by position.
fn ranks(xs: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..xs.len() as u32).collect();
    order.sort_by(|&a, &b| xs[a as usize].total_cmp(&xs[b as usize]).then(a.cmp(&b)));
    let mut r = vec![0u32; xs.len()];
    for (rank, &i) in order.iter().enumerate() {
        r[i as usize] = rank as u32;
    }
    r
}

/// Ranks within a resample, given each member's rank in the full sample.
/// Counting sort, ties (repeated members) broken by resample position.
fn resample_ranks(full_rank: &[u32], members: &[u32], out: &mut Vec<u32>, counts: &mut Vec<u32>) {
    counts.clear();
    counts.resize(full_rank.len() + 1, 0);
    for &i in members {
        counts[full_rank[i as usize] as usize + 1] += 1;
    }
    for k in 1..counts.len() {
        counts[k] += counts[k - 1];
    }
    out.clear();
    for &i in members {
        let key = full_rank[i as usize] as usize;
        out.push(counts[key]);
        counts[key] += 1;
    }
}

/// `(lambda_hat, joint_exceedances)` at level `u` from within-sample ranks.
fn lambda_at(rx: &[u32], ry: &[u32], u: f64) -> (f64, usize) {
    let n = rx.len();
    let m = ((u * n as f64) + 1e-9).floor() as usize;
    let m32 = m as u32;
    let below = rx
        .iter()
        .zip(ry)
        .filter(|(&a, &b)| a < m32 && b < m32)
        .count();
    let joint_exceed = n + below - 2 * m;
    let c = below as f64 / n as f64;
    let level = m as f64 / n as f64;
    (2.0 - c.ln() / level.ln(), joint_exceed)
}

/// Empirical upper tail dependence of components `j < j2` at each level.
pub fn empirical_tail_dependence(
    samples: &[Vec<f64>],
    j: usize,
    j2: usize,
    u_levels: &[f64],
    opts: &TailOptions,
) -> Result<TailDependenceEstimate, EstimateError> {
    if samples.len() < 2 {
        return Err(EstimateError::EmptyInput);
    }
    let d = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(EstimateError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    if j >= j2 || j2 >= d {
        return Err(EstimateError::BadIndices(j, j2));
    }
    if let Some(&bad) = u_levels.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(EstimateError::BadLevel(bad));
    }
    let n = samples.len();
    let xs: Vec<f64> = samples.iter().map(|s| s[j]).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s[j2]).collect();
    let (rx, ry) = (ranks(&xs), ranks(&ys));

    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for &u in u_levels {
        let (est, joint) = lambda_at(&rx, &ry, u);
        if joint < opts.min_joint_exceedances {
            dropped.push(DroppedLevel {
                u,
                joint_exceedances: joint,
            });
        } else {
            kept.push((u, est, joint));
        }
    }

    let boot: Vec<Vec<f64>> = (0..opts.bootstrap_resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(opts.seed, BOOTSTRAP_STREAM_BASE + b as u64);
            let members: Vec<u32> = (0..n).map(|_| rng.random_range(0..n as u32)).collect();
            let (mut bx, mut by, mut counts) = (Vec::new(), Vec::new(), Vec::new());
            resample_ranks(&rx, &members, &mut bx, &mut counts);
            resample_ranks(&ry, &members, &mut by, &mut counts);
            kept.iter()
                .map(|&(u, _, _)| lambda_at(&bx, &by, u).0)
                .collect()
        })
        .collect();

    let levels = kept
        .iter()
        .enumerate()
        .map(|(i, &(u, estimate, joint))| {
            let vals: Vec<f64> = boot
                .iter()
                .map(|b| b[i])
                .filter(|v| v.is_finite())
                .collect();
            TailLevel {
                u,
                estimate,
                se: sample_sd(&vals),
                joint_exceedances: joint,
            }
        })
        .collect();
    Ok(TailDependenceEstimate { levels, dropped })
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// One theory-versus-simulation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRecord {
    pub quantity: String,
    pub context: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub z_score: f64,
}

impl VerifyRecord {
    pub fn new(quantity: &str, context: String, theoretical: f64, est: Estimate) -> Self {
        let diff = est.value - theoretical;
        let z_score = if est.se > 0.0 {
            diff / est.se
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        VerifyRecord {
            quantity: quantity.to_string(),
            context,
            theoretical,
            empirical: est.value,
            std_error: est.se,
            z_score,
        }
    }

    /// A record that carries no comparison, e.g. a dropped level.
    pub fn warning(quantity: &str, context: String, theoretical: f64) -> Self {
        VerifyRecord {
            quantity: quantity.to_string(),
            context,
            theoretical,
            empirical: f64::NAN,
            std_error: f64::NAN,
            z_score: f64::NAN,
        }
    }

    pub fn within(&self, gate: f64) -> bool {
        // NaN z (warnings) never fails the gate.
        self.z_score.abs() <= gate || self.z_score.is_nan()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub records: Vec<VerifyRecord>,
    /// Violated hard invariants of the closed forms.
    pub invariant_failures: Vec<String>,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.invariant_failures.is_empty() && self.records.iter().all(|r| r.within(Z_GATE))
    }

    pub fn find(&self, quantity: &str, context: &str) -> Option<&VerifyRecord> {
        self.records
            .iter()
            .find(|r| r.quantity == quantity && r.context == context)
    }

    /// CSV with columns `quantity,context,theoretical,empirical,se,z`.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["quantity", "context", "theoretical", "empirical", "se", "z"])?;
        for r in &self.records {
            out.write_record([
                r.quantity.clone(),
                r.context.clone(),
                format!("{:?}", r.theoretical),
                format!("{:?}", r.empirical),
                format!("{:?}", r.std_error),
                format!("{:?}", r.z_score),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Settings for the stationary-sample part of [`verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSettings {
    pub samples: usize,
    pub options: TailOptions,
}

pub(crate) fn fmt_vec(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Runs the simulation and compares every estimable quantity with theory.
pub fn verify(
    model: &M5Model,
    cfg: &SimConfig,
    tau_list: &[TauVector],
    u_levels: &[f64],
    tail: &TailSettings,
) -> Result<VerifyReport, EstimateError> {
    let d = model.dim();
    let mut report = VerifyReport::default();
    for tau in tau_list {
        let summary = model.summary(tau)?;
        report.invariant_failures.extend(
            summary
                .check_invariants()
                .into_iter()
                .map(|s| format!("tau={}: {s}", fmt_vec(tau.as_slice()))),
        );
    }

    let maxima = block_maxima(cfg);
    for tau in tau_list {
        let ctx = format!("tau={}", fmt_vec(tau.as_slice()));
        let dep = empirical_limit_prob(&maxima, cfg.n, tau, Sequence::Dependent)?;
        report.records.push(VerifyRecord::new(
            "limit_prob_dep",
            ctx.clone(),
            model.limit_block_maxima(tau)?,
            dep,
        ));
        let iid = empirical_limit_prob(&maxima, cfg.n, tau, Sequence::Iid)?;
        report.records.push(VerifyRecord::new(
            "limit_prob_iid",
            ctx.clone(),
            model.gamma_hat(tau)?,
            iid,
        ));
        let theta = empirical_extremal_index(&maxima, cfg.n, tau)?;
        report.records.push(VerifyRecord::new(
            "theta",
            ctx,
            model.extremal_index(tau)?,
            theta,
        ));
    }
    for j in 0..d {
        let mut t = vec![DEGENERATE_TAU; d];
        t[j] = 1.0;
        let tau = TauVector::new(t)?;
        let est = empirical_extremal_index(&maxima, cfg.n, &tau)?;
        report.records.push(VerifyRecord::new(
            "theta_j",
            format!("j={}", j + 1),
            model.marginal_extremal_index(j)?,
            est,
        ));
    }

    if d >= 2 && !u_levels.is_empty() {
        let samples = stationary_samples(model, tail.samples, cfg.seed);
        for j in 0..d {
            for j2 in j + 1..d {
                let truth = model.tail_dependence_hat(j, j2)?;
                let est = empirical_tail_dependence(&samples, j, j2, u_levels, &tail.options)?;
                for lv in &est.levels {
                    report.records.push(VerifyRecord::new(
                        "lambda_hat",
                        format!("j={};j2={};u={}", j + 1, j2 + 1, lv.u),
                        truth,
                        Estimate {
                            value: lv.estimate,
                            se: lv.se,
                        },
                    ));
                }
                for dl in &est.dropped {
                    report.records.push(VerifyRecord::warning(
                        "lambda_hat_dropped",
                        format!(
                            "j={};j2={};u={};joint_exceedances={}",
                            j + 1,
                            j2 + 1,
                            dl.u,
                            dl.joint_exceedances
                        ),
                        truth,
                    ));
                }
            }
        }
    }
    Ok(report)
}
