//! Max-stable copulas for the innovation array.
//!
//! Three exchangeable families are supported. All of them are max-stable,
//! positive lower orthant dependent and closed under taking margins, which
//! is what the closed forms in [`crate::theory`] rely on.

use rand::Rng;
use thiserror::Error;

use crate::rng::{open01, unit_exponential};

/// Tolerance for [`Copula::is_max_stable`].
pub const MAX_STABILITY_TOL: f64 = 1e-10;
/// Slack allowed below the product copula in [`Copula::check_plod`].
pub const PLOD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CopulaError {
    #[error("dimension mismatch: copula has d = {expected}, point has {got} coordinates")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad component pair ({0}, {1})")]
    BadIndices(usize, usize),
    #[error("invalid copula parameter: {0}")]
    InvalidParameter(String),
    #[error("coordinate {0} lies outside [0, 1]")]
    OutsideUnitCube(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaKind {
    Independence,
    Comonotone,
    /// Gumbel–Hougaard copula `exp(-(sum_j (-log u_j)^alpha)^(1/alpha))`,
    /// `alpha >= 1`.
    Logistic {
        alpha: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Copula {
    dim: usize,
    kind: CopulaKind,
}

/// One innovation vector with standard Fréchet margins.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSample {
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxStability {
    pub holds: bool,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlodCheck {
    pub holds: bool,
    /// Grid point minimising `C(u) - prod u_j`, with that margin.
    pub worst_point: Vec<f64>,
    pub worst_margin: f64,
}

impl Copula {
    pub fn new(dim: usize, kind: CopulaKind) -> Result<Self, CopulaError> {
        if dim == 0 {
            return Err(CopulaError::InvalidParameter("d must be positive".into()));
        }
        if let CopulaKind::Logistic { alpha } = kind {
            if !(alpha.is_finite() && alpha >= 1.0) {
                return Err(CopulaError::InvalidParameter(format!(
                    "logistic alpha must be finite and >= 1, got {alpha}"
                )));
            }
        }
        Ok(Copula { dim, kind })
    }

    pub fn independence(dim: usize) -> Self {
        Self::new(dim, CopulaKind::Independence).expect("d > 0")
    }

    pub fn comonotone(dim: usize) -> Self {
        Self::new(dim, CopulaKind::Comonotone).expect("d > 0")
    }

    pub fn logistic(dim: usize, alpha: f64) -> Result<Self, CopulaError> {
        Self::new(dim, CopulaKind::Logistic { alpha })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CopulaKind {
        self.kind
    }

    fn check_point(&self, u: &[f64]) -> Result<(), CopulaError> {
        if u.len() != self.dim {
            return Err(CopulaError::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        match u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            Some(&x) => Err(CopulaError::OutsideUnitCube(x)),
            None => Ok(()),
        }
    }

    /// `C(u)`.
    pub fn evaluate(&self, u: &[f64]) -> Result<f64, CopulaError> {
        self.check_point(u)?;
        Ok(match self.kind {
            CopulaKind::Independence => u.iter().product(),
            CopulaKind::Comonotone => u.iter().copied().fold(1.0, f64::min),
            CopulaKind::Logistic { alpha } => {
                if u.contains(&0.0) {
                    0.0
                } else {
                    let x: Vec<f64> = u.iter().map(|v| -v.ln()).collect();
                    (-logistic_norm(&x, alpha)).exp()
                }
            }
        })
    }

    /// `log C(u)`; `-inf` when some coordinate is zero.
    pub fn log_evaluate(&self, u: &[f64]) -> Result<f64, CopulaError> {
        self.check_point(u)?;
        if u.contains(&0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match self.kind {
            CopulaKind::Independence => u.iter().map(|v| v.ln()).sum(),
            CopulaKind::Comonotone => u.iter().map(|v| v.ln()).fold(0.0, f64::min),
            CopulaKind::Logistic { alpha } => {
                let x: Vec<f64> = u.iter().map(|v| -v.ln()).collect();
                -logistic_norm(&x, alpha)
            }
        })
    }

    /// Bivariate margin of components `j < j2` (zero-based).
    pub fn subcopula(&self, j: usize, j2: usize) -> Result<Copula, CopulaError> {
        if j >= j2 || j2 >= self.dim {
            return Err(CopulaError::BadIndices(j, j2));
        }
        Ok(Copula {
            dim: 2,
            kind: self.kind,
        })
    }

    /// The same family in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Copula, CopulaError> {
        Copula::new(dim, self.kind)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MarginalSample {
        let mut z = vec![0.0; self.dim];
        self.sample_into(rng, &mut z);
        MarginalSample { z }
    }

    /// Writes one standard Fréchet draw with this copula into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match self.kind {
            CopulaKind::Independence => {
                for z in out.iter_mut() {
                    *z = 1.0 / unit_exponential(rng);
                }
            }
            CopulaKind::Comonotone => {
                let z = 1.0 / unit_exponential(rng);
                out.fill(z);
            }
            CopulaKind::Logistic { alpha: 1.0 } => {
                for z in out.iter_mut() {
                    *z = 1.0 / unit_exponential(rng);
                }
            }
            CopulaKind::Logistic { alpha } => {
                // Marshall–Olkin frailty: z_j = (S / E_j)^(1/alpha) with S
                // positive stable, E[exp(-t S)] = exp(-t^(1/alpha)). S comes
                // from Kanter's representation, kept in log space so large
                // alpha does not overflow.
                let a = 1.0 / alpha;
                let angle = std::f64::consts::PI * open01(rng);
                let w = unit_exponential(rng);
                let a_log_s = a * (a * angle).sin().ln() - angle.sin().ln()
                    + (1.0 - a) * (((1.0 - a) * angle).sin().ln() - w.ln());
                for z in out.iter_mut() {
                    let e = unit_exponential(rng);
                    *z = (a_log_s - a * e.ln()).exp();
                }
            }
        }
    }

    /// Checks `C(u^(1/n))^n = C(u)` on every grid point.
    pub fn is_max_stable(&self, n: u32, grid: &[Vec<f64>]) -> Result<MaxStability, CopulaError> {
        let mut max_deviation: f64 = 0.0;
        for u in grid {
            max_deviation = max_deviation.max(self.max_stability_deviation(u, n)?);
        }
        Ok(MaxStability {
            holds: max_deviation <= MAX_STABILITY_TOL,
            max_deviation,
        })
    }

    /// `|C(u^(1/n))^n - C(u)|`.
    pub fn max_stability_deviation(&self, u: &[f64], n: u32) -> Result<f64, CopulaError> {
        let root: Vec<f64> = u.iter().map(|x| x.powf(1.0 / n as f64)).collect();
        let lhs = self.evaluate(&root)?.powi(n as i32);
        Ok((lhs - self.evaluate(u)?).abs())
    }

    /// Checks `C(u) >= prod_j u_j` on every grid point.
    pub fn check_plod(&self, grid: &[Vec<f64>]) -> Result<PlodCheck, CopulaError> {
        let mut worst = PlodCheck {
            holds: true,
            worst_point: Vec::new(),
            worst_margin: f64::INFINITY,
        };
        for u in grid {
            let margin = self.evaluate(u)? - u.iter().product::<f64>();
            if margin < worst.worst_margin {
                worst.worst_margin = margin;
                worst.worst_point = u.clone();
            }
        }
        worst.holds = worst.worst_margin >= -PLOD_TOL;
        Ok(worst)
    }
}

/// `(sum_j x_j^alpha)^(1/alpha)` for `x_j >= 0`, scaled by the largest entry.
pub(crate) fn logistic_norm(x: &[f64], alpha: f64) -> f64 {
    let m = x.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    if m.is_infinite() {
        return f64::INFINITY;
    }
    let s: f64 = x.iter().map(|v| (v / m).powf(alpha)).sum();
    m * s.powf(1.0 / alpha)
}

/// Regular grid with `per_axis` interior points on each axis of `(0,1)^d`.
pub fn lattice(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (1..=per_axis)
        .map(|i| i as f64 / (per_axis + 1) as f64)
        .collect();
    let mut points = vec![Vec::with_capacity(dim)];
    for _ in 0..dim {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    points
}

/// `count` points drawn uniformly from `(0,1)^d`.
pub fn random_grid<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| open01(rng)).collect())
        .collect()
}
