//! M5 processes: moving maxima driven by copula-dependent innovation vectors.
//!
//! An M5 process is a stationary `d`-variate time series
//!
//! ```text
//! Y[n, j] = max over (l, k) of alpha[l][k][j] * Z[l, n - k, j]
//! ```
//!
//! driven by an array of independent innovation vectors `Z[l, m]` with
//! standard Fréchet margins and a common copula. The crate provides:
//!
//! - [`signatures`]: the weight array `alpha[l][k][j]` and its validation.
//! - [`copulas`]: the max-stable innovation copulas (independence,
//!   comonotone, logistic) with evaluation and sampling.
//! - [`theory`]: closed-form extremes of the process: the limiting copulas,
//!   the multivariate extremal index, tail-dependence and extremal
//!   coefficients.
//! - [`simulate`]: exact stationary sample paths and block maxima.
//! - [`estimate`]: Monte Carlo estimators and the verification report that
//!   pits them against [`theory`].
//! - [`config`]: the experiment file format and the command runner behind
//!   the `m5x` binary.
//!
//! ```
//! use m5x::{Copula, M5Model, SignatureArray, TauVector};
//!
//! let sig = SignatureArray::from_entries(
//!     2, 2, 0, 1,
//!     &[
//!         (0, 0, 0, 0.5), (0, 1, 0, 0.3), (1, 0, 0, 0.2),
//!         (0, 0, 1, 0.4), (0, 1, 1, 0.1), (1, 0, 1, 0.1), (1, 1, 1, 0.4),
//!     ],
//! )?;
//! let model = M5Model::new(sig, Copula::comonotone(2))?;
//! let theta = model.extremal_index(&TauVector::new(vec![1.0, 1.0])?)?;
//! assert!((theta - 0.9 / 1.4).abs() < 1e-12);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod config;
pub mod copulas;
pub mod estimate;
mod numerics;
pub mod rng;
pub mod signatures;
pub mod simulate;
pub mod theory;

pub use copulas::{Copula, CopulaError, CopulaKind, MarginalSample};
pub use estimate::{Estimate, VerifyRecord, VerifyReport};
pub use signatures::{SignatureArray, SignatureError};
pub use simulate::{BlockMaxima, ProcessPath, SimConfig};
pub use theory::{M5Model, TauVector, TheoryError, TheorySummary};

// The guide under `book/` is compiled here so every snippet in it runs as a
// doctest. One module per chapter keeps failures traceable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/signatures.md")]
    mod signatures {}
    #[doc = include_str!("../../../book/src/copulas.md")]
    mod copulas {}
    #[doc = include_str!("../../../book/src/extremal_index.md")]
    mod extremal_index {}
    #[doc = include_str!("../../../book/src/tail_dependence.md")]
    mod tail_dependence {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
