//! Experiment files and the command runner used by the `m5x` binary.
//!
//! An experiment is a TOML document:
//!
//! ```toml
//! [model]
//! d = 2
//! patterns = 2
//! k_min = 0
//! k_max = 1
//! copula = { kind = "comonotone" }   # or "independence", or { kind = "logistic", alpha = 2.0 }
//! weights = [                        # (l, k, j, w); l and j count from 1
//!   { l = 1, k = 0, j = 1, w = 0.5 },
//!   { l = 1, k = 1, j = 1, w = 0.5 },
//!   { l = 1, k = 0, j = 2, w = 1.0 },
//! ]
//!
//! [sim]            # optional
//! n = 1000
//! reps = 10000
//! seed = 42
//!
//! [experiment]     # optional
//! tau = [[1.0, 1.0]]
//! u_levels = [0.95, 0.99]
//! output_dir = "out"
//! commands = ["theory", "verify"]
//! ```
//!
//! Unlisted weights are zero.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::copulas::{Copula, CopulaKind};
use crate::estimate::{verify, TailOptions, TailSettings, VerifyReport};
use crate::signatures::SignatureArray;
use crate::simulate::{block_maxima, replication, SimConfig};
use crate::theory::{M5Model, TauVector};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv error on {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("computation failed: {0}")]
    Compute(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Theory,
    Simulate,
    Verify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    #[serde(default)]
    sim: SimSettings,
    #[serde(default)]
    experiment: RawExperiment,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    d: usize,
    patterns: usize,
    k_min: i64,
    k_max: i64,
    copula: RawCopula,
    weights: Vec<RawWeight>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCopula {
    kind: String,
    alpha: Option<f64>,
    d: Option<usize>,
}

impl RawCopula {
    fn kind(&self) -> Result<CopulaKind, String> {
        let kind = match (self.kind.as_str(), self.alpha) {
            ("independence", None) => CopulaKind::Independence,
            ("comonotone", None) => CopulaKind::Comonotone,
            ("logistic", Some(alpha)) => CopulaKind::Logistic { alpha },
            ("logistic", None) => return Err("logistic copula needs alpha".into()),
            ("independence" | "comonotone", Some(_)) => {
                return Err(format!("{} copula takes no alpha", self.kind))
            }
            (other, _) => return Err(format!("unknown copula kind `{other}`")),
        };
        Ok(kind)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    l: usize,
    k: i64,
    j: usize,
    w: f64,
}

/// Simulation settings; every field has a default.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Stationary draws used for tail-dependence estimates.
    pub tail_samples: usize,
    pub bootstrap: usize,
    pub min_joint_exceedances: usize,
    /// Replications whose full paths `simulate` writes out.
    pub path_reps: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            n: 1000,
            reps: 10_000,
            seed: 42,
            tail_samples: 100_000,
            bootstrap: 200,
            min_joint_exceedances: 50,
            path_reps: 1,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawExperiment {
    tau: Option<Vec<Vec<f64>>>,
    u_levels: Option<Vec<f64>>,
    output_dir: Option<PathBuf>,
    commands: Option<Vec<Command>>,
}

/// A fully validated experiment with defaults filled in.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: M5Model,
    pub sim: SimSettings,
    pub tau_list: Vec<TauVector>,
    pub u_levels: Vec<f64>,
    pub output_dir: PathBuf,
    pub commands: Vec<Command>,
}

impl ExperimentConfig {
    pub fn sim_config(&self) -> Result<SimConfig, RunError> {
        SimConfig::new(self.model.clone(), self.sim.n, self.sim.reps, self.sim.seed)
            .map_err(|e| RunError::Compute(e.to_string()))
    }

    pub fn tail_settings(&self) -> TailSettings {
        TailSettings {
            samples: self.sim.tail_samples,
            options: TailOptions {
                bootstrap_resamples: self.sim.bootstrap,
                min_joint_exceedances: self.sim.min_joint_exceedances,
                seed: self.sim.seed,
            },
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let invalid = |msg: String| ConfigError::Validation(msg);
    let m = &raw.model;

    let mut entries = Vec::with_capacity(m.weights.len());
    for w in &m.weights {
        let at = format!("(l={}, k={}, j={})", w.l, w.k, w.j);
        if w.l == 0 || w.l > m.patterns {
            return Err(invalid(format!(
                "weight {at}: l must be in 1..={}",
                m.patterns
            )));
        }
        if w.j == 0 || w.j > m.d {
            return Err(invalid(format!("weight {at}: j must be in 1..={}", m.d)));
        }
        if w.k < m.k_min || w.k > m.k_max {
            return Err(invalid(format!(
                "weight {at}: k must be in {}..={}",
                m.k_min, m.k_max
            )));
        }
        if !(w.w >= 0.0 && w.w.is_finite()) {
            return Err(invalid(format!(
                "weight {at} is {}, must be nonnegative",
                w.w
            )));
        }
        entries.push((w.l - 1, w.k, w.j - 1, w.w));
    }
    let sig = SignatureArray::from_entries(m.d, m.patterns, m.k_min, m.k_max, &entries)
        .map_err(|e| invalid(format!("signature: {e} (indices zero-based)")))?;

    if let Some(cd) = m.copula.d {
        if cd != m.d {
            return Err(invalid(format!("copula d = {cd} but model d = {}", m.d)));
        }
    }
    let kind = m.copula.kind().map_err(invalid)?;
    let copula = Copula::new(m.d, kind).map_err(|e| invalid(format!("copula: {e}")))?;
    let model = M5Model::new(sig, copula).map_err(|e| invalid(format!("model: {e}")))?;

    let sim = raw.sim;
    if sim.n == 0 || sim.reps == 0 {
        return Err(invalid("sim.n and sim.reps must be positive".into()));
    }
    if sim.tail_samples < 2 {
        return Err(invalid("sim.tail_samples must be at least 2".into()));
    }

    let ex = raw.experiment;
    let tau_list = match ex.tau {
        None => vec![TauVector::ones(m.d)],
        Some(list) => list
            .into_iter()
            .map(|t| {
                if t.len() != m.d {
                    return Err(invalid(format!("tau {t:?} must have {} entries", m.d)));
                }
                TauVector::new(t).map_err(|e| invalid(e.to_string()))
            })
            .collect::<Result<_, _>>()?,
    };
    let u_levels = ex.u_levels.unwrap_or_else(|| vec![0.95, 0.99]);
    if let Some(u) = u_levels.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
        return Err(invalid(format!("u level {u} must lie in (0, 1)")));
    }

    Ok(ExperimentConfig {
        model,
        sim,
        tau_list,
        u_levels,
        output_dir: ex.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        commands: ex.commands.unwrap_or_else(|| vec![Command::Theory]),
    })
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// False only when `verify` found a failing comparison or invariant.
    pub passed: bool,
    pub summary: String,
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> RunError + '_ {
    move |source| RunError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn run(cfg: &ExperimentConfig, command: Command) -> Result<RunOutcome, RunError> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    match command {
        Command::Theory => run_theory(cfg, dir),
        Command::Simulate => run_simulate(cfg, dir),
        Command::Verify => run_verify(cfg, dir),
    }
}

fn run_theory(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let csv_path = dir.join("theory.csv");
    let report_path = dir.join("theory_report.txt");
    let mut writer = csv::Writer::from_writer(create(&csv_path)?);
    let mut report = String::new();
    for (i, tau) in cfg.tau_list.iter().enumerate() {
        let s = cfg
            .model
            .summary(tau)
            .map_err(|e| RunError::Compute(e.to_string()))?;
        if i == 0 {
            writer
                .write_record(s.csv_header())
                .map_err(csv_err(&csv_path))?;
        }
        writer
            .write_record(s.csv_values().iter().map(|v| format!("{v:?}")))
            .map_err(csv_err(&csv_path))?;
        report.push_str(&s.report());
        for bad in s.check_invariants() {
            report.push_str(&format!("INVARIANT VIOLATED: {bad}\n"));
        }
        report.push('\n');
    }
    writer.flush().map_err(io_err(&csv_path))?;
    let mut out = create(&report_path)?;
    out.write_all(report.as_bytes())
        .map_err(io_err(&report_path))?;
    out.flush().map_err(io_err(&report_path))?;
    Ok(RunOutcome {
        files: vec![csv_path, report_path],
        passed: true,
        summary: report,
    })
}

fn run_simulate(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let sim = cfg.sim_config()?;
    let paths_path = dir.join("paths.csv");
    let maxima_path = dir.join("maxima.csv");

    let mut paths = csv::Writer::from_writer(create(&paths_path)?);
    paths
        .write_record(["rep", "t", "j", "value"])
        .map_err(csv_err(&paths_path))?;
    for rep in 0..cfg.sim.path_reps.min(sim.reps) {
        let (path, _) = replication(&sim, rep);
        for t in 1..=path.n {
            for (j, v) in path.at(t).iter().enumerate() {
                paths
                    .write_record([
                        rep.to_string(),
                        t.to_string(),
                        (j + 1).to_string(),
                        format!("{v:?}"),
                    ])
                    .map_err(csv_err(&paths_path))?;
            }
        }
    }
    paths.flush().map_err(io_err(&paths_path))?;

    let maxima = block_maxima(&sim);
    let mut out = csv::Writer::from_writer(create(&maxima_path)?);
    out.write_record(["rep", "kind", "j", "value"])
        .map_err(csv_err(&maxima_path))?;
    for (rep, bm) in maxima.iter().enumerate() {
        for (kind, values) in [("dep", &bm.m_dep), ("iid", &bm.m_iid)] {
            for (j, v) in values.iter().enumerate() {
                out.write_record([
                    rep.to_string(),
                    kind.to_string(),
                    (j + 1).to_string(),
                    format!("{v:?}"),
                ])
                .map_err(csv_err(&maxima_path))?;
            }
        }
    }
    out.flush().map_err(io_err(&maxima_path))?;
    Ok(RunOutcome {
        files: vec![paths_path, maxima_path],
        passed: true,
        summary: format!("simulated {} replications of length {}\n", sim.reps, sim.n),
    })
}

fn run_verify(cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let sim = cfg.sim_config()?;
    let report = verify(
        &cfg.model,
        &sim,
        &cfg.tau_list,
        &cfg.u_levels,
        &cfg.tail_settings(),
    )
    .map_err(|e| RunError::Compute(e.to_string()))?;
    let path = dir.join("verify.csv");
    report.write_csv(create(&path)?).map_err(csv_err(&path))?;
    Ok(RunOutcome {
        files: vec![path],
        passed: report.passes(),
        summary: render_verify(&report),
    })
}

fn render_verify(report: &VerifyReport) -> String {
    let mut s = String::new();
    for r in &report.records {
        s.push_str(&format!(
            "{:<20} {:<32} theory {:>12.6} empirical {:>12.6} se {:>10.6} z {:>7.2}\n",
            r.quantity, r.context, r.theoretical, r.empirical, r.std_error, r.z_score
        ));
    }
    for f in &report.invariant_failures {
        s.push_str(&format!("INVARIANT VIOLATED: {f}\n"));
    }
    s.push_str(if report.passes() {
        "verify: PASS\n"
    } else {
        "verify: FAIL\n"
    });
    s
}
