//! Forward and backward mean-square estimation for rank-one stationary
//! Gaussian processes.
//!
//! A rank-one process stacks `n` scalar causal filters driven by one
//! unit-variance white noise `w_k`:
//!
//! ```text
//! xi_k = sum_{l >= 0} G_l w_{k-l},   G_l = (g1_l, ..., gn_l)^T
//! ```
//!
//! For scalar processes the one-step prediction error (estimating the
//! present from the past) equals the postdiction error (estimating it from
//! the future). For vector processes the two may differ, and a process can
//! be regular in one time direction while deterministic in the other. This
//! crate computes both error covariances from finite windows, checks the
//! associated spectral identities, and classifies symbol families with the
//! backward-shift cyclicity rules.
//!
//! Module map:
//!
//! * [`symbols`]: scalar generating functions and their coefficients.
//! * [`catalog`]: ready-made process models.
//! * [`spectral`]: boundary spectra, geometric means, factorization check.
//! * [`covariance`]: autocovariance sequences and block-Toeplitz windows.
//! * [`estimation`]: finite-window predictors/postdictors, sweeps and the
//!   numerical determinism test.
//! * [`cyclicity`]: cyclic/non-cyclic labels, determinism rules, Hilbert
//!   matrix and span-residual probe.
//! * [`simulate`]: seeded sample paths and empirical validation.
//!
//! Coefficient convention: index `l` multiplies `z^l` and `z` is the unit
//! delay, so causal filters expand in nonnegative powers of `z`.

pub mod catalog;
pub mod covariance;
pub mod cyclicity;
mod error;
pub mod estimation;
pub mod linalg;
pub mod simulate;
pub mod spectral;
pub mod symbols;

pub use catalog::ProcessModel;
pub use covariance::{AutocovarianceSequence, WindowMatrix};
pub use cyclicity::{CyclicityLabel, DeterminismRuleVerdict};
pub use error::{Error, Result};
pub use estimation::{DeterminismReport, Direction, PredictionSolution};
pub use num_complex::Complex64;
pub use simulate::SamplePath;
pub use spectral::SpectralGrid;
pub use symbols::{CoefficientWindow, Symbol};

/// Dense complex matrix used for all covariance blocks.
pub type CMatrix = nalgebra::DMatrix<Complex64>;

/// Crate version, stamped into every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
