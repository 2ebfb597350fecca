//! Sample paths and block maxima of an M5 process.
//!
//! With a finite lag window `[k_min, k_max]`, a path `Y_1..Y_n` needs the
//! innovations at times `1 - k_max ..= n - k_min` and nothing else, so paths
//! are exactly stationary from the first index without burn-in.
//!
//! Replication `r` draws its dependent path from stream `2r` and its
//! i.i.d.-associated sample from stream `2r + 1` of the configured seed.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{stream, StreamRng};
use crate::theory::M5Model;

/// First stream id used for stationary draws outside replications.
pub const STATIONARY_STREAM_BASE: u64 = 1 << 40;
const STATIONARY_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("innovations cover times {have_from}..={have_to}, path needs {need_from}..={need_to}")]
    IndexCoverage {
        have_from: i64,
        have_to: i64,
        need_from: i64,
        need_to: i64,
    },
    #[error("innovation array shape does not match the model")]
    ShapeMismatch,
    #[error("invalid simulation settings: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub model: M5Model,
}

impl SimConfig {
    pub fn new(model: M5Model, n: usize, reps: usize, seed: u64) -> Result<Self, SimError> {
        if n == 0 {
            return Err(SimError::InvalidConfig(
                "block length n must be >= 1".into(),
            ));
        }
        if reps == 0 {
            return Err(SimError::InvalidConfig("reps must be >= 1".into()));
        }
        Ok(SimConfig {
            n,
            reps,
            seed,
            model,
        })
    }
}

/// Innovations `Z[l, m, j]` for consecutive times `m` starting at
/// `first_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct Innovations {
    patterns: usize,
    dim: usize,
    first_time: i64,
    len: usize,
    z: Vec<f64>,
}

impl Innovations {
    /// Wraps explicit values laid out as `[(l * len + m) * dim + j]`.
    pub fn from_values(
        patterns: usize,
        dim: usize,
        first_time: i64,
        len: usize,
        z: Vec<f64>,
    ) -> Result<Self, SimError> {
        if z.len() != patterns * len * dim {
            return Err(SimError::ShapeMismatch);
        }
        Ok(Innovations {
            patterns,
            dim,
            first_time,
            len,
            z,
        })
    }

    pub fn first_time(&self) -> i64 {
        self.first_time
    }

    pub fn last_time(&self) -> i64 {
        self.first_time + self.len as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn get(&self, l: usize, time: i64, j: usize) -> f64 {
        let m = (time - self.first_time) as usize;
        self.z[(l * self.len + m) * self.dim + j]
    }

    /// Multiplies every innovation of component `j` by `c`.
    pub fn scale_component(&mut self, j: usize, c: f64) {
        for cell in self.z.chunks_exact_mut(self.dim) {
            cell[j] *= c;
        }
    }
}

/// A realization `Y_1..Y_n`, stored row-major (`n` rows of `d`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessPath {
    pub n: usize,
    pub dim: usize,
    pub y: Vec<f64>,
}

impl ProcessPath {
    /// Row for time `t` (one-based).
    pub fn at(&self, t: usize) -> &[f64] {
        &self.y[(t - 1) * self.dim..t * self.dim]
    }

    pub fn column_max(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for row in self.y.chunks_exact(self.dim) {
            for (a, &b) in m.iter_mut().zip(row) {
                *a = f64::max(*a, b);
            }
        }
        m
    }
}

/// Componentwise maxima of one dependent block and one i.i.d. block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMaxima {
    pub m_dep: Vec<f64>,
    pub m_iid: Vec<f64>,
}

/// Draws the innovations needed for a path of length `n`.
pub fn gen_innovations<R: Rng + ?Sized>(model: &M5Model, n: usize, rng: &mut R) -> Innovations {
    let sig = model.signature();
    let dim = sig.dim();
    let first_time = 1 - sig.k_max();
    let len = n + sig.window_len() - 1;
    let mut z = vec![0.0; sig.patterns() * len * dim];
    for cell in z.chunks_exact_mut(dim) {
        model.copula().sample_into(rng, cell);
    }
    Innovations {
        patterns: sig.patterns(),
        dim,
        first_time,
        len,
        z,
    }
}

/// `Y[t, j] = max_{l,k} alpha[l][k][j] * Z[l, t - k, j]` for `t = 1..=n`.
pub fn build_path(model: &M5Model, innov: &Innovations, n: usize) -> Result<ProcessPath, SimError> {
    let sig = model.signature();
    let dim = sig.dim();
    if innov.patterns != sig.patterns() || innov.dim != dim {
        return Err(SimError::ShapeMismatch);
    }
    let need_from = 1 - sig.k_max();
    let need_to = n as i64 - sig.k_min();
    if innov.first_time() > need_from || innov.last_time() < need_to {
        return Err(SimError::IndexCoverage {
            have_from: innov.first_time(),
            have_to: innov.last_time(),
            need_from,
            need_to,
        });
    }
    let mut y = vec![0.0; n * dim];
    for (ti, row) in y.chunks_exact_mut(dim).enumerate() {
        let t = ti as i64 + 1;
        for (l, k, w) in sig.support() {
            for (j, (out, &a)) in row.iter_mut().zip(w).enumerate() {
                if a > 0.0 {
                    *out = f64::max(*out, a * innov.get(l, t - k, j));
                }
            }
        }
    }
    Ok(ProcessPath { n, dim, y })
}

/// One draw from the stationary law `F_Y`: every support point gets its own
/// fresh innovation vector.
pub fn sample_stationary_into<R: Rng + ?Sized>(
    model: &M5Model,
    rng: &mut R,
    out: &mut [f64],
    scratch: &mut [f64],
) {
    out.fill(0.0);
    for (_, _, w) in model.signature().support() {
        if w.iter().all(|&a| a == 0.0) {
            continue;
        }
        model.copula().sample_into(rng, scratch);
        for ((o, &a), &z) in out.iter_mut().zip(w).zip(scratch.iter()) {
            *o = f64::max(*o, a * z);
        }
    }
}

pub fn sample_stationary<R: Rng + ?Sized>(model: &M5Model, rng: &mut R) -> Vec<f64> {
    let d = model.dim();
    let mut out = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    sample_stationary_into(model, rng, &mut out, &mut scratch);
    out
}

/// `count` independent draws from `F_Y`, deterministic in `seed` and
/// independent of the thread count.
pub fn stationary_samples(model: &M5Model, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let chunks = count.div_ceil(STATIONARY_CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream(seed, STATIONARY_STREAM_BASE + c as u64);
            let size = STATIONARY_CHUNK.min(count - c * STATIONARY_CHUNK);
            (0..size)
                .map(|_| sample_stationary(model, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn replication_streams(seed: u64, rep: usize) -> (StreamRng, StreamRng) {
    let r = rep as u64;
    (stream(seed, 2 * r), stream(seed, 2 * r + 1))
}

fn iid_maxima<R: Rng + ?Sized>(model: &M5Model, n: usize, rng: &mut R) -> Vec<f64> {
    let d = model.dim();
    let mut m = vec![0.0; d];
    let mut draw = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for _ in 0..n {
        sample_stationary_into(model, rng, &mut draw, &mut scratch);
        for (a, &b) in m.iter_mut().zip(&draw) {
            *a = f64::max(*a, b);
        }
    }
    m
}

/// Replication `rep` in full: its dependent path and both maxima.
pub fn replication(cfg: &SimConfig, rep: usize) -> (ProcessPath, BlockMaxima) {
    let (mut dep_rng, mut iid_rng) = replication_streams(cfg.seed, rep);
    let innov = gen_innovations(&cfg.model, cfg.n, &mut dep_rng);
    let path = build_path(&cfg.model, &innov, cfg.n).expect("generated innovations cover the path");
    let maxima = BlockMaxima {
        m_dep: path.column_max(),
        m_iid: iid_maxima(&cfg.model, cfg.n, &mut iid_rng),
    };
    (path, maxima)
}

/// `cfg.reps` independent replications, in replication order.
pub fn block_maxima(cfg: &SimConfig) -> Vec<BlockMaxima> {
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| replication(cfg, rep).1)
        .collect()
}
