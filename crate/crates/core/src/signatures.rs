//! The signature array `alpha[l][k][j]` of an M5 process.
//!
//! Pattern `l` spreads one innovation sequence over lags `k` and components
//! `j`. Every component's weights must sum to one so that the process keeps
//! standard Fréchet margins. Indices `l` and `j` are zero-based here; the lag
//! `k` is the actual (possibly negative) lag.

use std::ops::RangeInclusive;

use thiserror::Error;

use crate::numerics::compensated_sum;

/// Column sums must be within this distance of one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignatureError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("index out of range: pattern {pattern}, lag {lag}, component {component}")]
    IndexOutOfRange {
        pattern: usize,
        lag: i64,
        component: usize,
    },
    #[error("weight at pattern {pattern}, lag {lag}, component {component} is not finite")]
    NonFinite {
        pattern: usize,
        lag: i64,
        component: usize,
    },
    #[error("negative weight {weight} at pattern {pattern}, lag {lag}, component {component}")]
    NegativeWeight {
        pattern: usize,
        lag: i64,
        component: usize,
        weight: f64,
    },
    #[error("weights of component {component} sum to {sum}, expected 1")]
    BadNormalization { component: usize, sum: f64 },
    #[error("pattern {pattern} has no positive weight")]
    DeadPattern { pattern: usize },
    #[error("component {component} has no positive weight")]
    ZeroColumn { component: usize },
}

/// Dense weight array indexed `[pattern][lag][component]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureArray {
    dim: usize,
    patterns: usize,
    k_min: i64,
    k_max: i64,
    alpha: Vec<f64>,
}

impl SignatureArray {
    /// An all-zero array of the given shape. Not valid until weights are set.
    pub fn zeros(
        dim: usize,
        patterns: usize,
        k_min: i64,
        k_max: i64,
    ) -> Result<Self, SignatureError> {
        if dim == 0 {
            return Err(SignatureError::InvalidShape("d must be positive".into()));
        }
        if patterns == 0 {
            return Err(SignatureError::InvalidShape(
                "number of patterns must be positive".into(),
            ));
        }
        if k_min > k_max {
            return Err(SignatureError::InvalidShape(format!(
                "k_min {k_min} exceeds k_max {k_max}"
            )));
        }
        let window = (k_max - k_min + 1) as usize;
        Ok(SignatureArray {
            dim,
            patterns,
            k_min,
            k_max,
            alpha: vec![0.0; patterns * window * dim],
        })
    }

    /// Builds an array from `(pattern, lag, component, weight)` entries
    /// without validating it. Unlisted entries are zero; repeated entries
    /// overwrite.
    pub fn raw_from_entries(
        dim: usize,
        patterns: usize,
        k_min: i64,
        k_max: i64,
        entries: &[(usize, i64, usize, f64)],
    ) -> Result<Self, SignatureError> {
        let mut sig = Self::zeros(dim, patterns, k_min, k_max)?;
        for &(l, k, j, w) in entries {
            sig.set(l, k, j, w)?;
        }
        Ok(sig)
    }

    /// Builds and validates an array from `(pattern, lag, component, weight)`
    /// entries.
    pub fn from_entries(
        dim: usize,
        patterns: usize,
        k_min: i64,
        k_max: i64,
        entries: &[(usize, i64, usize, f64)],
    ) -> Result<Self, SignatureError> {
        Self::raw_from_entries(dim, patterns, k_min, k_max, entries)?.validate()
    }

    /// The degenerate one-pattern, one-lag array with unit weights.
    pub fn single_weight(dim: usize) -> Self {
        let entries: Vec<_> = (0..dim).map(|j| (0, 0, j, 1.0)).collect();
        Self::from_entries(dim, 1, 0, 0, &entries).expect("unit weights are valid")
    }

    pub fn set(&mut self, l: usize, k: i64, j: usize, w: f64) -> Result<(), SignatureError> {
        let idx = self.index(l, k, j).ok_or(SignatureError::IndexOutOfRange {
            pattern: l,
            lag: k,
            component: j,
        })?;
        self.alpha[idx] = w;
        Ok(())
    }

    fn index(&self, l: usize, k: i64, j: usize) -> Option<usize> {
        if l >= self.patterns || j >= self.dim || k < self.k_min || k > self.k_max {
            return None;
        }
        let ki = (k - self.k_min) as usize;
        Some((l * self.window_len() + ki) * self.dim + j)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn patterns(&self) -> usize {
        self.patterns
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn lags(&self) -> RangeInclusive<i64> {
        self.k_min..=self.k_max
    }

    /// Number of lags in the window, `k_max - k_min + 1`.
    pub fn window_len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    /// Weight `alpha[l][k][j]`; zero outside the declared window.
    pub fn weight(&self, l: usize, k: i64, j: usize) -> f64 {
        self.index(l, k, j).map_or(0.0, |i| self.alpha[i])
    }

    /// The `d` weights at support point `(l, k)`.
    pub fn weights_at(&self, l: usize, k: i64) -> &[f64] {
        let start = self
            .index(l, k, 0)
            .unwrap_or_else(|| panic!("support point ({l}, {k}) outside the signature"));
        &self.alpha[start..start + self.dim]
    }

    /// Iterates over every support point `(l, k, weights)` in storage order.
    pub fn support(&self) -> impl Iterator<Item = (usize, i64, &[f64])> + '_ {
        let window = self.window_len();
        self.alpha
            .chunks_exact(self.dim)
            .enumerate()
            .map(move |(i, w)| (i / window, self.k_min + (i % window) as i64, w))
    }

    /// Nonzero entries as `(pattern, lag, component, weight)`.
    pub fn entries(&self) -> Vec<(usize, i64, usize, f64)> {
        self.support()
            .flat_map(|(l, k, w)| {
                w.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(move |(j, &x)| (l, k, j, x))
            })
            .collect()
    }

    /// `max_k alpha[l][k][j]`.
    pub fn pattern_max(&self, l: usize, j: usize) -> f64 {
        self.lags()
            .map(|k| self.weight(l, k, j))
            .fold(0.0, f64::max)
    }

    pub fn column_sum(&self, j: usize) -> f64 {
        compensated_sum(self.support().map(|(_, _, w)| w[j]))
    }

    /// Checks nonnegativity, unit column sums and that no pattern is dead.
    pub fn validate(self) -> Result<Self, SignatureError> {
        for (l, k, w) in self.support() {
            for (j, &x) in w.iter().enumerate() {
                if !x.is_finite() {
                    return Err(SignatureError::NonFinite {
                        pattern: l,
                        lag: k,
                        component: j,
                    });
                }
                if x < 0.0 {
                    return Err(SignatureError::NegativeWeight {
                        pattern: l,
                        lag: k,
                        component: j,
                        weight: x,
                    });
                }
            }
        }
        for j in 0..self.dim {
            let sum = self.column_sum(j);
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(SignatureError::BadNormalization { component: j, sum });
            }
        }
        for l in 0..self.patterns {
            let alive = self
                .lags()
                .any(|k| self.weights_at(l, k).iter().any(|&x| x > 0.0));
            if !alive {
                return Err(SignatureError::DeadPattern { pattern: l });
            }
        }
        Ok(self)
    }

    /// Rescales every component so its weights sum to one. Dead patterns are
    /// left in place; run [`validate`](Self::validate) afterwards.
    pub fn normalize(mut self) -> Result<Self, SignatureError> {
        for (l, k, w) in self.support() {
            for (j, &x) in w.iter().enumerate() {
                if !x.is_finite() {
                    return Err(SignatureError::NonFinite {
                        pattern: l,
                        lag: k,
                        component: j,
                    });
                }
                if x < 0.0 {
                    return Err(SignatureError::NegativeWeight {
                        pattern: l,
                        lag: k,
                        component: j,
                        weight: x,
                    });
                }
            }
        }
        for j in 0..self.dim {
            let sum = self.column_sum(j);
            if sum <= 0.0 {
                return Err(SignatureError::ZeroColumn { component: j });
            }
            if sum == 1.0 {
                continue;
            }
            for chunk in self.alpha.chunks_exact_mut(self.dim) {
                chunk[j] /= sum;
            }
        }
        Ok(self)
    }

    /// `theta_j = sum_l max_k alpha[l][k][j]`, the extremal index of
    /// component `j`.
    pub fn column_max_sum(&self, j: usize) -> f64 {
        assert!(
            j < self.dim,
            "component {j} out of range for d = {}",
            self.dim
        );
        compensated_sum((0..self.patterns).map(|l| self.pattern_max(l, j)))
    }

    /// Restricts the array to the given components, in the given order.
    /// Patterns with no weight on any selected component are dropped, since
    /// they contribute nothing to the sub-process.
    pub fn select_components(&self, components: &[usize]) -> Result<Self, SignatureError> {
        if components.is_empty() {
            return Err(SignatureError::InvalidShape(
                "empty component selection".into(),
            ));
        }
        if let Some(&bad) = components.iter().find(|&&j| j >= self.dim) {
            return Err(SignatureError::IndexOutOfRange {
                pattern: 0,
                lag: self.k_min,
                component: bad,
            });
        }
        let live: Vec<usize> = (0..self.patterns)
            .filter(|&l| {
                self.lags()
                    .any(|k| components.iter().any(|&j| self.weight(l, k, j) > 0.0))
            })
            .collect();
        let mut sub = Self::zeros(components.len(), live.len().max(1), self.k_min, self.k_max)?;
        for (new_l, &l) in live.iter().enumerate() {
            for k in self.lags() {
                for (new_j, &j) in components.iter().enumerate() {
                    sub.set(new_l, k, new_j, self.weight(l, k, j))?;
                }
            }
        }
        sub.validate()
    }
}
