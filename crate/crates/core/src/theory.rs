//! Closed-form extreme-value quantities of an M5 process.
//!
//! With innovation copula `C*` (max-stable, so it is also its own
//! attractor) and signature `alpha`, the i.i.d.-associated block maxima have
//! limiting copula
//!
//! ```text
//! Ĉ(u) = prod_{l,k} C*(u_1^alpha[l][k][1], ..., u_d^alpha[l][k][d])
//! ```
//!
//! and the block maxima of the process itself converge to
//!
//! ```text
//! gamma(tau) = prod_l C*(exp(-max_k alpha[l][k][1] tau_1), ...)
//! ```
//!
//! The multivariate extremal index is `theta(tau) = log gamma / log gamma_hat`.
//! Everything is accumulated in log space with compensated summation.

use thiserror::Error;

use crate::copulas::{Copula, CopulaError};
use crate::numerics::compensated_sum;
use crate::rng::stream;
use crate::signatures::{SignatureArray, SignatureError};

/// `tau_i` used in place of zero when approximating the marginal extremal
/// index as a limit of the multivariate one.
pub const NEAR_ZERO_TAU: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Copula(#[from] CopulaError),
    #[error("copula dimension {copula} does not match signature dimension {signature}")]
    DimensionMismatch { signature: usize, copula: usize },
    #[error("innovation copula is not max-stable (deviation {0:e})")]
    NotMaxStable(f64),
    #[error("invalid threshold vector: {0}")]
    InvalidTau(String),
    #[error("component index {0} out of range")]
    BadIndex(usize),
    #[error("bad component pair ({0}, {1})")]
    BadIndices(usize, usize),
    #[error("extremal index denominator {0:e} is not strictly negative")]
    DegenerateDenominator(f64),
}

/// Threshold parameters `tau_1..tau_d`, all strictly positive and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TauVector(Vec<f64>);

impl TauVector {
    pub fn new(tau: Vec<f64>) -> Result<Self, TheoryError> {
        if tau.is_empty() {
            return Err(TheoryError::InvalidTau("empty".into()));
        }
        if let Some(&bad) = tau.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(TheoryError::InvalidTau(format!(
                "entries must be positive and finite, got {bad}"
            )));
        }
        Ok(TauVector(tau))
    }

    pub fn ones(dim: usize) -> Self {
        TauVector(vec![1.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self, TheoryError> {
        TauVector::new(self.0.iter().map(|t| t * c).collect())
    }
}

/// Which limiting copula an extremal coefficient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    /// `Ĉ`, the limit for the associated i.i.d. sequence.
    Hat,
    /// `C`, the limit for the process itself.
    Limiting,
}

/// Both sides of the two identities linking `lambda^(C)` to `Ĉ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRelation {
    /// `lambda^(C)` from the per-support-point sum.
    pub lambda_c: f64,
    /// `2 + theta(1/theta_j, 1/theta_j2) log Ĉ_jj2(e^(-1/theta_j), e^(-1/theta_j2))`.
    pub via_scaled_hat: f64,
    /// `lambda^(Ĉ) + log[Ĉ_jj2(e^(-theta/theta_j), e^(-theta/theta_j2)) / Ĉ_jj2(e^-1, e^-1)]`.
    pub via_log_ratio: f64,
}

/// An M5 model: a validated signature plus a max-stable innovation copula.
#[derive(Debug, Clone, PartialEq)]
pub struct M5Model {
    sig: SignatureArray,
    cstar: Copula,
}

impl M5Model {
    pub fn new(sig: SignatureArray, cstar: Copula) -> Result<Self, TheoryError> {
        if sig.dim() != cstar.dim() {
            return Err(TheoryError::DimensionMismatch {
                signature: sig.dim(),
                copula: cstar.dim(),
            });
        }
        let sig = sig.validate()?;
        let mut rng = stream(0x5eed, 0);
        let grid = crate::copulas::random_grid(cstar.dim(), 32, &mut rng);
        for n in [2, 5] {
            let check = cstar.is_max_stable(n, &grid)?;
            if !check.holds {
                return Err(TheoryError::NotMaxStable(check.max_deviation));
            }
        }
        Ok(M5Model { sig, cstar })
    }

    pub fn signature(&self) -> &SignatureArray {
        &self.sig
    }

    pub fn copula(&self) -> &Copula {
        &self.cstar
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    /// The bivariate sub-model of components `j < j2`.
    pub fn pair(&self, j: usize, j2: usize) -> Result<M5Model, TheoryError> {
        self.check_pair(j, j2)?;
        Ok(M5Model {
            sig: self.sig.select_components(&[j, j2])?,
            cstar: self.cstar.subcopula(j, j2)?,
        })
    }

    fn check_pair(&self, j: usize, j2: usize) -> Result<(), TheoryError> {
        if j >= j2 || j2 >= self.dim() {
            return Err(TheoryError::BadIndices(j, j2));
        }
        Ok(())
    }

    fn check_point(&self, u: &[f64]) -> Result<(), TheoryError> {
        if u.len() != self.dim() {
            return Err(CopulaError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            }
            .into());
        }
        if let Some(&bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(CopulaError::OutsideUnitCube(bad).into());
        }
        Ok(())
    }

    /// Copula of the stationary law `F_Y`:
    /// `C_Y(u) = prod_{l,k} C_Z(u_1^alpha[l][k][1], ...)`.
    pub fn copula_y(&self, u: &[f64]) -> Result<f64, TheoryError> {
        self.check_point(u)?;
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        let mut point = vec![0.0; self.dim()];
        let mut logs = Vec::with_capacity(self.sig.patterns() * self.sig.window_len());
        for (_, _, w) in self.sig.support() {
            for ((p, &x), &a) in point.iter_mut().zip(u).zip(w) {
                *p = x.powf(a);
            }
            logs.push(self.cstar.evaluate(&point)?.ln());
        }
        Ok(compensated_sum(logs).exp())
    }

    /// `log Ĉ(u)`, with `Ĉ(u) = prod_{l,k} C*(u_1^alpha[l][k][1], ...)`.
    pub fn log_copula_hat(&self, u: &[f64]) -> Result<f64, TheoryError> {
        self.check_point(u)?;
        if u.contains(&0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        let neg_log_u: Vec<f64> = u.iter().map(|x| -x.ln()).collect();
        let mut point = vec![0.0; self.dim()];
        let mut terms = Vec::new();
        for (_, _, w) in self.sig.support() {
            for ((p, &x), &a) in point.iter_mut().zip(&neg_log_u).zip(w) {
                *p = (-a * x).exp();
            }
            terms.push(self.cstar.log_evaluate(&point)?);
        }
        Ok(compensated_sum(terms))
    }

    /// The limiting copula `Ĉ` of the associated i.i.d. block maxima.
    pub fn copula_hat(&self, u: &[f64]) -> Result<f64, TheoryError> {
        Ok(self.log_copula_hat(u)?.exp())
    }

    /// `log gamma_hat(tau)` for nonnegative `tau`.
    fn log_gamma_hat(&self, tau: &[f64]) -> f64 {
        let mut point = vec![0.0; self.dim()];
        let terms = self.sig.support().map(|(_, _, w)| {
            for ((p, &a), &t) in point.iter_mut().zip(w).zip(tau) {
                *p = (-a * t).exp();
            }
            self.cstar
                .log_evaluate(&point)
                .expect("point has model dimension")
        });
        compensated_sum(terms.collect::<Vec<_>>())
    }

    /// `log gamma(tau)` for nonnegative `tau`.
    fn log_gamma(&self, tau: &[f64]) -> f64 {
        let mut point = vec![0.0; self.dim()];
        let terms: Vec<f64> = (0..self.sig.patterns())
            .map(|l| {
                for (j, (p, &t)) in point.iter_mut().zip(tau).enumerate() {
                    *p = (-self.sig.pattern_max(l, j) * t).exp();
                }
                self.cstar
                    .log_evaluate(&point)
                    .expect("point has model dimension")
            })
            .collect();
        compensated_sum(terms)
    }

    fn check_tau(&self, tau: &TauVector) -> Result<(), TheoryError> {
        if tau.len() != self.dim() {
            return Err(TheoryError::InvalidTau(format!(
                "expected {} entries, got {}",
                self.dim(),
                tau.len()
            )));
        }
        Ok(())
    }

    /// `gamma(tau) = lim P(M_n <= n / tau)` for the process.
    pub fn limit_block_maxima(&self, tau: &TauVector) -> Result<f64, TheoryError> {
        self.check_tau(tau)?;
        Ok(self.log_gamma(tau.as_slice()).exp())
    }

    /// `gamma_hat(tau) = lim P(M̂_n <= n / tau)` for the associated i.i.d.
    /// sequence.
    pub fn gamma_hat(&self, tau: &TauVector) -> Result<f64, TheoryError> {
        self.check_tau(tau)?;
        Ok(self.log_gamma_hat(tau.as_slice()).exp())
    }

    /// Extremal index at a nonnegative, not identically zero `tau`.
    fn theta_at(&self, tau: &[f64]) -> Result<f64, TheoryError> {
        let den = self.log_gamma_hat(tau);
        if den >= -1e-300 {
            return Err(TheoryError::DegenerateDenominator(den));
        }
        let theta = self.log_gamma(tau) / den;
        debug_assert!(
            theta > 0.0 && theta <= 1.0 + 1e-12,
            "extremal index {theta} outside (0, 1]"
        );
        Ok(theta)
    }

    /// Multivariate extremal index `theta(tau)`.
    pub fn extremal_index(&self, tau: &TauVector) -> Result<f64, TheoryError> {
        self.check_tau(tau)?;
        self.theta_at(tau.as_slice())
    }

    /// `theta_j = sum_l max_k alpha[l][k][j]`.
    pub fn marginal_extremal_index(&self, j: usize) -> Result<f64, TheoryError> {
        if j >= self.dim() {
            return Err(TheoryError::BadIndex(j));
        }
        Ok(self.sig.column_max_sum(j))
    }

    pub fn marginal_indices(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.sig.column_max_sum(j))
            .collect()
    }

    /// Limiting copula of the process block maxima,
    /// `C(u) = Ĉ(u_1^(1/theta_1), ...)^theta(-log u_1 / theta_1, ...)`.
    pub fn copula_limit(&self, u: &[f64]) -> Result<f64, TheoryError> {
        self.check_point(u)?;
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        if u.iter().all(|&x| x == 1.0) {
            return Ok(1.0);
        }
        let thetas = self.marginal_indices();
        let tau: Vec<f64> = u.iter().zip(&thetas).map(|(x, t)| -x.ln() / t).collect();
        let theta = self.theta_at(&tau)?;
        let powered: Vec<f64> = u
            .iter()
            .zip(&thetas)
            .map(|(x, t)| x.powf(1.0 / t))
            .collect();
        Ok(self.copula_hat(&powered)?.powf(theta))
    }

    /// Upper tail dependence of `Ĉ` for components `j < j2`:
    /// `2 + sum_{l,k} log C*_jj2(e^(-alpha[l][k][j]), e^(-alpha[l][k][j2]))`.
    pub fn tail_dependence_hat(&self, j: usize, j2: usize) -> Result<f64, TheoryError> {
        self.check_pair(j, j2)?;
        let sub = self.cstar.subcopula(j, j2)?;
        let terms: Vec<f64> = self
            .sig
            .support()
            .map(|(_, _, w)| sub.log_evaluate(&[(-w[j]).exp(), (-w[j2]).exp()]))
            .collect::<Result<_, _>>()?;
        Ok(2.0 + compensated_sum(terms))
    }

    /// Upper tail dependence of the limiting copula `C` for `j < j2`:
    /// `2 + theta(1/theta_j, 1/theta_j2) sum_{l,k} log C*_jj2(e^(-alpha_j/theta_j), e^(-alpha_j2/theta_j2))`,
    /// with the bivariate extremal index of the `(j, j2)` sub-process.
    pub fn tail_dependence_limit(&self, j: usize, j2: usize) -> Result<f64, TheoryError> {
        let pair = self.pair(j, j2)?;
        let (tj, tj2) = (self.sig.column_max_sum(j), self.sig.column_max_sum(j2));
        let theta = pair.extremal_index(&TauVector::new(vec![1.0 / tj, 1.0 / tj2])?)?;
        let sub = self.cstar.subcopula(j, j2)?;
        let terms: Vec<f64> = self
            .sig
            .support()
            .map(|(_, _, w)| sub.log_evaluate(&[(-w[j] / tj).exp(), (-w[j2] / tj2).exp()]))
            .collect::<Result<_, _>>()?;
        Ok(2.0 + theta * compensated_sum(terms))
    }

    /// Evaluates `lambda^(C)` and both of its expressions through `Ĉ` of the
    /// `(j, j2)` sub-model.
    pub fn tail_dependence_relation(
        &self,
        j: usize,
        j2: usize,
    ) -> Result<TailRelation, TheoryError> {
        let lambda_c = self.tail_dependence_limit(j, j2)?;
        let pair = self.pair(j, j2)?;
        let (tj, tj2) = (self.sig.column_max_sum(j), self.sig.column_max_sum(j2));
        let theta = pair.extremal_index(&TauVector::new(vec![1.0 / tj, 1.0 / tj2])?)?;

        let scaled = pair.copula_hat(&[(-1.0 / tj).exp(), (-1.0 / tj2).exp()])?;
        let via_scaled_hat = 2.0 + theta * scaled.ln();

        let e1 = (-1.0f64).exp();
        let numerator = pair.copula_hat(&[(-theta / tj).exp(), (-theta / tj2).exp()])?;
        let denominator = pair.copula_hat(&[e1, e1])?;
        let via_log_ratio = self.tail_dependence_hat(j, j2)? + (numerator / denominator).ln();

        Ok(TailRelation {
            lambda_c,
            via_scaled_hat,
            via_log_ratio,
        })
    }

    /// Extremal coefficient `eps` with `X(u, ..., u) = u^eps` for
    /// `X = Ĉ` or `X = C`.
    pub fn extremal_coefficient(&self, which: CoefficientKind) -> Result<f64, TheoryError> {
        match which {
            CoefficientKind::Hat => {
                let e1 = vec![(-1.0f64).exp(); self.dim()];
                Ok(-self.log_copula_hat(&e1)?)
            }
            CoefficientKind::Limiting => {
                let inv: Vec<f64> = self.marginal_indices().iter().map(|t| 1.0 / t).collect();
                let theta = self.theta_at(&inv)?;
                let point: Vec<f64> = inv.iter().map(|x| (-x).exp()).collect();
                Ok(-theta * self.log_copula_hat(&point)?)
            }
        }
    }

    /// Every closed-form quantity at one `tau`.
    pub fn summary(&self, tau: &TauVector) -> Result<TheorySummary, TheoryError> {
        let d = self.dim();
        let mut lambda_hat = vec![vec![1.0; d]; d];
        let mut lambda_c = vec![vec![1.0; d]; d];
        for j in 0..d {
            for j2 in j + 1..d {
                let h = self.tail_dependence_hat(j, j2)?;
                let c = self.tail_dependence_limit(j, j2)?;
                lambda_hat[j][j2] = h;
                lambda_hat[j2][j] = h;
                lambda_c[j][j2] = c;
                lambda_c[j2][j] = c;
            }
        }
        Ok(TheorySummary {
            tau: tau.as_slice().to_vec(),
            theta_tau: self.extremal_index(tau)?,
            theta_j: self.marginal_indices(),
            lambda_hat,
            lambda_c,
            eps_hat: self.extremal_coefficient(CoefficientKind::Hat)?,
            eps_c: self.extremal_coefficient(CoefficientKind::Limiting)?,
            gamma_hat: self.gamma_hat(tau)?,
            gamma: self.limit_block_maxima(tau)?,
        })
    }
}

/// `|c(u^(1/n))^n - c(u)|` for each `n`. The attractor of a max-stable
/// copula is the copula itself, so every deviation should vanish.
pub fn converge_to_attractor(
    c: &Copula,
    u: &[f64],
    n_list: &[u32],
) -> Result<Vec<f64>, CopulaError> {
    n_list
        .iter()
        .map(|&n| c.max_stability_deviation(u, n))
        .collect()
}

/// All closed-form outputs for one model at one `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheorySummary {
    pub tau: Vec<f64>,
    pub theta_tau: f64,
    pub theta_j: Vec<f64>,
    /// Symmetric, unit diagonal.
    pub lambda_hat: Vec<Vec<f64>>,
    pub lambda_c: Vec<Vec<f64>>,
    pub eps_hat: f64,
    pub eps_c: f64,
    pub gamma_hat: f64,
    pub gamma: f64,
}

impl TheorySummary {
    pub fn csv_header(&self) -> Vec<String> {
        let d = self.theta_j.len();
        let mut cols = vec!["theta_tau".to_string()];
        cols.extend((1..=d).map(|j| format!("theta_{j}")));
        for prefix in ["lambda_hat", "lambda_c"] {
            for j in 0..d {
                for j2 in j + 1..d {
                    cols.push(format!("{prefix}_{}_{}", j + 1, j2 + 1));
                }
            }
        }
        cols.extend(["eps_hat", "eps_c", "gamma_hat", "gamma"].map(String::from));
        cols
    }

    pub fn csv_values(&self) -> Vec<f64> {
        let d = self.theta_j.len();
        let mut vals = vec![self.theta_tau];
        vals.extend(&self.theta_j);
        for m in [&self.lambda_hat, &self.lambda_c] {
            for (j, row) in m.iter().enumerate() {
                vals.extend(&row[j + 1..d]);
            }
        }
        vals.extend([self.eps_hat, self.eps_c, self.gamma_hat, self.gamma]);
        vals
    }

    /// Human-readable rendering.
    pub fn report(&self) -> String {
        use std::fmt::Write;
        let d = self.theta_j.len();
        let mut s = String::new();
        let _ = writeln!(s, "tau                    = {:?}", self.tau);
        let _ = writeln!(s, "extremal index theta   = {:.12}", self.theta_tau);
        for (j, t) in self.theta_j.iter().enumerate() {
            let _ = writeln!(s, "theta_{}                = {:.12}", j + 1, t);
        }
        for j in 0..d {
            for j2 in j + 1..d {
                let _ = writeln!(
                    s,
                    "lambda ({},{})  hat = {:.12}  limit = {:.12}",
                    j + 1,
                    j2 + 1,
                    self.lambda_hat[j][j2],
                    self.lambda_c[j][j2]
                );
            }
        }
        let _ = writeln!(
            s,
            "extremal coefficient   hat = {:.12}  limit = {:.12}",
            self.eps_hat, self.eps_c
        );
        let _ = writeln!(s, "gamma_hat(tau)         = {:.12}", self.gamma_hat);
        let _ = writeln!(s, "gamma(tau)             = {:.12}", self.gamma);
        s
    }

    /// Hard invariants; returns a description of each violation.
    pub fn check_invariants(&self) -> Vec<String> {
        let d = self.theta_j.len() as f64;
        let mut bad = Vec::new();
        let in_unit = |x: f64| x > 0.0 && x <= 1.0 + 1e-12;
        if !in_unit(self.theta_tau) {
            bad.push(format!("theta_tau = {} outside (0, 1]", self.theta_tau));
        }
        for (j, &t) in self.theta_j.iter().enumerate() {
            if !in_unit(t) {
                bad.push(format!("theta_{} = {t} outside (0, 1]", j + 1));
            }
        }
        for (name, m) in [
            ("lambda_hat", &self.lambda_hat),
            ("lambda_c", &self.lambda_c),
        ] {
            for row in m.iter() {
                for &x in row {
                    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                        bad.push(format!("{name} entry {x} outside [0, 1]"));
                    }
                }
            }
        }
        for (name, e) in [("eps_hat", self.eps_hat), ("eps_c", self.eps_c)] {
            if !(1.0 - 1e-12..=d + 1e-12).contains(&e) {
                bad.push(format!("{name} = {e} outside [1, {d}]"));
            }
        }
        let lhs = self.gamma;
        let rhs = self.gamma_hat.powf(self.theta_tau);
        if (lhs - rhs).abs() > 1e-10 {
            bad.push(format!("gamma {lhs} != gamma_hat^theta {rhs}"));
        }
        bad
    }
}

/// Specialized closed forms for the three supported `C*` families, written
/// directly in terms of the signature. They exist to cross-check the generic
/// evaluators above.
pub mod closed_forms {
    use crate::numerics::compensated_sum;
    use crate::signatures::SignatureArray;

    /// Comonotone `C*`:
    /// `gamma(tau) = exp(-sum_l max_k max_j alpha[l][k][j] tau_j)`.
    pub fn comonotone_limit(sig: &SignatureArray, tau: &[f64]) -> f64 {
        let s = compensated_sum((0..sig.patterns()).map(|l| {
            sig.lags()
                .flat_map(|k| (0..sig.dim()).map(move |j| (k, j)))
                .map(|(k, j)| sig.weight(l, k, j) * tau[j])
                .fold(0.0, f64::max)
        }));
        (-s).exp()
    }

    /// Independence `C*`:
    /// `gamma(tau) = exp(-sum_j sum_l max_k alpha[l][k][j] tau_j)`.
    pub fn independence_limit(sig: &SignatureArray, tau: &[f64]) -> f64 {
        let s = compensated_sum(
            (0..sig.dim())
                .flat_map(|j| (0..sig.patterns()).map(move |l| (l, j)))
                .map(|(l, j)| sig.pattern_max(l, j) * tau[j]),
        );
        (-s).exp()
    }

    /// Logistic `C*` with parameter `alpha`:
    /// `theta(tau) = sum_l (sum_j (max_k alpha[l][k][j] tau_j)^alpha)^(1/alpha)
    ///             / sum_{l,k} (sum_j (alpha[l][k][j] tau_j)^alpha)^(1/alpha)`.
    pub fn logistic_extremal_index(sig: &SignatureArray, alpha: f64, tau: &[f64]) -> f64 {
        let norm = |xs: &mut dyn Iterator<Item = f64>| -> f64 {
            xs.map(|x| x.powf(alpha)).sum::<f64>().powf(1.0 / alpha)
        };
        let num = compensated_sum(
            (0..sig.patterns())
                .map(|l| norm(&mut (0..sig.dim()).map(|j| sig.pattern_max(l, j) * tau[j]))),
        );
        let den = compensated_sum(
            sig.support()
                .map(|(_, _, w)| norm(&mut w.iter().zip(tau).map(|(a, t)| a * t))),
        );
        num / den
    }

    /// Comonotone `C*`: `lambda^(Ĉ)_jj2 = 2 - sum_{l,k} max(alpha_j, alpha_j2)`.
    pub fn comonotone_tail_dependence_hat(sig: &SignatureArray, j: usize, j2: usize) -> f64 {
        2.0 - compensated_sum(sig.support().map(|(_, _, w)| w[j].max(w[j2])))
    }

    /// Comonotone `C*`:
    /// `lambda^(C)_jj2 = 2 - sum_l max(max_k alpha_j / theta_j, max_k alpha_j2 / theta_j2)`.
    pub fn comonotone_tail_dependence_limit(sig: &SignatureArray, j: usize, j2: usize) -> f64 {
        2.0 - limit_pattern_sum(sig, j, j2)
    }

    fn limit_pattern_sum(sig: &SignatureArray, j: usize, j2: usize) -> f64 {
        let (tj, tj2) = (sig.column_max_sum(j), sig.column_max_sum(j2));
        compensated_sum(
            (0..sig.patterns())
                .map(|l| (sig.pattern_max(l, j) / tj).max(sig.pattern_max(l, j2) / tj2)),
        )
    }

    /// The comonotone comparison statistic
    /// `sum_{l,k} max(alpha_j, alpha_j2) - sum_l max(max_k alpha_j / theta_j, max_k alpha_j2 / theta_j2)`;
    /// positive exactly when `lambda^(C) > lambda^(Ĉ)`.
    pub fn comonotone_lambda_gap(sig: &SignatureArray, j: usize, j2: usize) -> f64 {
        compensated_sum(sig.support().map(|(_, _, w)| w[j].max(w[j2])))
            - limit_pattern_sum(sig, j, j2)
    }
}
