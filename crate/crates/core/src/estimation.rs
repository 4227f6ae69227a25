//! Finite-window linear prediction (from the past) and postdiction (from
//! the future).
//!
//! Windows of rank-one processes are routinely singular, so the normal
//! equations are solved with an eigendecomposition pseudo-inverse and a
//! relative cutoff; `Omega = Gamma_0 - C R^+ C*`. Backward estimation is
//! forward estimation of the time-reversed process.
//!
//! Some models (the harmonic example in particular) have error variances
//! that collapse far below double precision; [`extended`] computes whole
//! sweeps in multiprecision for those.

pub mod extended;

use std::fmt;

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::ProcessModel;
use crate::covariance::{autocov_default, cross_blocks, window_matrix, AutocovarianceSequence};
use crate::linalg::{hermitian_part, max_abs, trace_re};
use crate::{CMatrix, Complex64, Error, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Final backward trace below which a sweep is called deterministic.
pub const DEFAULT_DETERMINISM_THRESHOLD: f64 = 1e-10;

/// Relative trace change over the second half of a sweep that counts as
/// stabilized.
pub const STABILIZATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Estimate `xi_0` from `xi_{-1}, xi_{-2}, ...`.
    #[serde(rename = "fwd")]
    Forward,
    /// Estimate `xi_0` from `xi_1, xi_2, ...`.
    #[serde(rename = "bwd")]
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSolution {
    pub direction: Direction,
    pub window: usize,
    /// `A_1..A_p` with `xi_hat_0 = sum_j A_j xi_{-j}` (forward) or
    /// `sum_j A_j xi_j` (backward).
    pub coefficients: Vec<CMatrix>,
    pub error_covariance: CMatrix,
    pub rank_used: usize,
    pub rank_tolerance: f64,
}

impl PredictionSolution {
    pub fn trace(&self) -> f64 {
        trace_re(&self.error_covariance)
    }

    pub fn det(&self) -> f64 {
        self.error_covariance.determinant().re
    }
}

/// Optimal linear estimator of `xi_0` from a window of `p` samples.
pub fn predict(
    gamma: &AutocovarianceSequence,
    window: usize,
    direction: Direction,
    rank_tol: f64,
) -> Result<PredictionSolution> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if window > gamma.max_lag() {
        return Err(Error::WindowExceedsLags {
            window,
            lags: gamma.max_lag(),
        });
    }
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance {rank_tol} not in (0, 1)")));
    }
    let gamma0 = gamma.lag0();
    if max_abs(gamma0) == 0.0 {
        return Err(Error::DegenerateGamma0);
    }
    let n = gamma.n();
    let r = window_matrix(gamma, window, direction)?;
    let c = cross_blocks(gamma, window, direction)?;

    let eig = SymmetricEigen::new(r.body);
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = rank_tol * lmax;
    let dim = n * window;
    let mut pinv = CMatrix::zeros(dim, dim);
    let mut rank_used = 0;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            rank_used += 1;
            let v = eig.eigenvectors.column(i);
            pinv += (v * v.adjoint()) * Complex64::new(1.0 / lam, 0.0);
        }
    }
    let a = &c * &pinv;
    let omega = hermitian_part(&(gamma0 - &a * c.adjoint()));
    let coefficients = (0..window)
        .map(|j| a.view((0, j * n), (n, n)).into_owned())
        .collect();
    Ok(PredictionSolution {
        direction,
        window,
        coefficients,
        error_covariance: omega,
        rank_used,
        rank_tolerance: rank_tol,
    })
}

/// One [`predict`] per window on a shared autocovariance.
pub fn sweep(
    gamma: &AutocovarianceSequence,
    windows: &[usize],
    direction: Direction,
    rank_tol: f64,
) -> Result<Vec<PredictionSolution>> {
    windows
        .par_iter()
        .map(|&p| predict(gamma, p, direction, rank_tol))
        .collect()
}

fn check_increasing(windows: &[usize]) -> Result<()> {
    if windows.is_empty() || windows.windows(2).any(|w| w[0] >= w[1]) || windows[0] == 0 {
        return Err(Error::InvalidArgument("windows must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// `(p, Omega(p))` for each window with the model's default solver.
pub fn error_sweep(model: &ProcessModel, windows: &[usize], direction: Direction) -> Result<Vec<(usize, CMatrix)>> {
    error_sweep_with(model, windows, direction, default_solver(model, windows))
}

pub fn error_sweep_with(
    model: &ProcessModel,
    windows: &[usize],
    direction: Direction,
    solver: Solver,
) -> Result<Vec<(usize, CMatrix)>> {
    check_increasing(windows)?;
    let max = *windows.last().expect("nonempty");
    match solver {
        Solver::PseudoInverse { rank_tol } => {
            let gamma = autocov_default(model, max)?;
            Ok(sweep(&gamma, windows, direction, rank_tol)?
                .into_iter()
                .map(|s| (s.window, s.error_covariance))
                .collect())
        }
        Solver::Extended { precision_bits } => {
            let ext = extended::extended_sweep(model, max, direction, precision_bits)?;
            Ok(windows.iter().map(|&p| (p, ext.omegas[p - 1].clone())).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Solver {
    /// Double precision, eigendecomposition pseudo-inverse per window.
    PseudoInverse { rank_tol: f64 },
    /// Multiprecision prefix Cholesky over the whole sweep.
    Extended { precision_bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Deterministic,
    NotDeterministic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminismReport {
    pub windows: Vec<usize>,
    /// `trace Omega_b(p)` per window.
    pub traces: Vec<f64>,
    pub verdict: Verdict,
    pub threshold: f64,
    pub solver: Solver,
    /// Each trace is below its predecessor (decided at working precision).
    pub strictly_decreasing: bool,
    /// Relative trace change across the second half of the sweep.
    pub relative_change: f64,
    /// `Omega_b` at the largest window.
    #[serde(skip)]
    pub final_error_covariance: CMatrix,
}

impl DeterminismReport {
    /// `traces` never increase by more than `slack`.
    pub fn non_increasing(&self, slack: f64) -> bool {
        self.traces.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

fn classify_traces(traces: &[f64], threshold: f64) -> (Verdict, f64) {
    let last = *traces.last().expect("nonempty");
    let mid = traces[traces.len() / 2];
    let rel = (last - mid).abs() / last.abs().max(f64::MIN_POSITIVE);
    let verdict = if last < threshold {
        Verdict::Deterministic
    } else if rel < STABILIZATION_TOL {
        Verdict::NotDeterministic
    } else {
        Verdict::Inconclusive
    };
    (verdict, rel)
}

/// Solver used when none is requested: extended precision for real models.
pub fn default_solver(model: &ProcessModel, windows: &[usize]) -> Solver {
    if model.is_real() {
        let max = windows.iter().copied().max().unwrap_or(1);
        Solver::Extended {
            precision_bits: extended::default_precision(max),
        }
    } else {
        Solver::PseudoInverse {
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// Numerical surrogate for backward determinism: sweep the postdiction
/// error over `windows` and inspect the trace curve.
pub fn is_backward_deterministic_numeric(
    model: &ProcessModel,
    windows: &[usize],
    threshold: f64,
) -> Result<DeterminismReport> {
    let solver = default_solver(model, windows);
    is_backward_deterministic_with(model, windows, threshold, solver)
}

pub fn is_backward_deterministic_with(
    model: &ProcessModel,
    windows: &[usize],
    threshold: f64,
    solver: Solver,
) -> Result<DeterminismReport> {
    if windows.len() < 3 {
        return Err(Error::InvalidArgument("determinism sweep needs at least 3 windows".into()));
    }
    check_increasing(windows)?;
    let max = windows[windows.len() - 1];
    let (traces, strictly_decreasing, final_error_covariance) = match solver {
        Solver::PseudoInverse { rank_tol } => {
            let gamma = autocov_default(model, max)?;
            let sols = sweep(&gamma, windows, Direction::Backward, rank_tol)?;
            let traces: Vec<f64> = sols.iter().map(PredictionSolution::trace).collect();
            let dec = traces.windows(2).all(|w| w[1] < w[0]);
            let last = sols.last().expect("nonempty").error_covariance.clone();
            (traces, dec, last)
        }
        Solver::Extended { precision_bits } => {
            let ext = extended::extended_sweep(model, max, Direction::Backward, precision_bits)?;
            let traces = windows.iter().map(|&p| ext.traces[p - 1]).collect();
            let dec = windows.windows(2).all(|w| ext.trace_below(w[1], w[0]));
            (traces, dec, ext.omegas[max - 1].clone())
        }
    };
    let (verdict, relative_change) = classify_traces(&traces, threshold);
    Ok(DeterminismReport {
        windows: windows.to_vec(),
        traces,
        verdict,
        threshold,
        solver,
        strictly_decreasing,
        relative_change,
        final_error_covariance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{custom, ma_example};
    use crate::covariance::autocov_default;
    use crate::linalg::{is_psd, loewner_le};
    use crate::symbols::Symbol;

    fn assert_re(m: &CMatrix, expect: &[&[f64]], tol: f64) {
        for (r, row) in expect.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert!((m[(r, c)].re - v).abs() <= tol, "({r},{c}) = {} vs {v}", m[(r, c)]);
                assert!(m[(r, c)].im.abs() <= tol);
            }
        }
    }

    #[test]
    fn ma_window_one() {
        let g = autocov_default(&ma_example(2.0).unwrap(), 2).unwrap();
        let f = predict(&g, 1, Direction::Forward, DEFAULT_RANK_TOL).unwrap();
        assert_re(&f.error_covariance, &[&[1.0, 1.0], &[1.0, 1.0]], 1e-12);
        // x_hat = 2 y_{-1}: A_1 = [[0, 2], [0, 0]]
        assert_re(&f.coefficients[0], &[&[0.0, 2.0], &[0.0, 0.0]], 1e-12);
        let b = predict(&g, 1, Direction::Backward, DEFAULT_RANK_TOL).unwrap();
        assert_re(&b.error_covariance, &[&[4.0, 0.0], &[0.0, 0.0]], 1e-12);
        // x_hat = y_hat = (x_1 - y_1)/2
        assert_re(&b.coefficients[0], &[&[0.5, -0.5], &[0.5, -0.5]], 1e-12);
    }

    #[test]
    fn two_tap_model_against_brute_force() {
        // channels (1, z): xi_k = (w_k, w_{k-1}). From the past, w_{k-1} is
        // observed exactly and w_k is unpredictable: Omega_f = diag(1, 0).
        let m = custom("1,z", vec![Symbol::constant(1.0).unwrap(), Symbol::polynomial(&[0.0, 1.0]).unwrap()]).unwrap();
        let g = autocov_default(&m, 3).unwrap();
        let f = predict(&g, 1, Direction::Forward, DEFAULT_RANK_TOL).unwrap();
        assert_re(&f.error_covariance, &[&[1.0, 0.0], &[0.0, 0.0]], 1e-12);
        assert!(is_psd(&f.error_covariance, 1e-12));
        // From the future xi_1 = (w_1, w_0): w_0 known, w_{-1} is not.
        let b = predict(&g, 1, Direction::Backward, DEFAULT_RANK_TOL).unwrap();
        assert_re(&b.error_covariance, &[&[0.0, 0.0], &[0.0, 1.0]], 1e-12);
    }

    #[test]
    fn scalar_time_symmetry() {
        let m = custom("s", vec![Symbol::polynomial(&[1.0, 0.5]).unwrap()]).unwrap();
        let g = autocov_default(&m, 11).unwrap();
        let f = predict(&g, 10, Direction::Forward, DEFAULT_RANK_TOL).unwrap();
        let b = predict(&g, 10, Direction::Backward, DEFAULT_RANK_TOL).unwrap();
        assert!((f.error_covariance[(0, 0)] - b.error_covariance[(0, 0)]).norm() <= 1e-10);
    }

    #[test]
    fn error_paths() {
        let g = autocov_default(&ma_example(2.0).unwrap(), 2).unwrap();
        assert!(matches!(predict(&g, 3, Direction::Forward, 1e-10), Err(Error::WindowExceedsLags { .. })));
        assert!(matches!(predict(&g, 1, Direction::Forward, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(predict(&g, 1, Direction::Forward, 1.0), Err(Error::InvalidArgument(_))));
        let zero = AutocovarianceSequence::new(vec![CMatrix::zeros(1, 1); 3], 0.0).unwrap();
        assert!(matches!(predict(&zero, 1, Direction::Forward, 1e-10), Err(Error::DegenerateGamma0)));
    }

    #[test]
    fn ma_sweep_saturates() {
        let model = ma_example(2.0).unwrap();
        for (_, om) in error_sweep(&model, &[1, 2, 4, 8], Direction::Forward).unwrap() {
            assert_re(&om, &[&[1.0, 1.0], &[1.0, 1.0]], 1e-10);
        }
        assert!(error_sweep(&model, &[2, 1], Direction::Forward).is_err());
    }

    #[test]
    fn omega_below_gamma0() {
        let g = autocov_default(&ma_example(0.5).unwrap(), 6).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            for p in 1..=5 {
                let s = predict(&g, p, dir, DEFAULT_RANK_TOL).unwrap();
                assert!(loewner_le(&s.error_covariance, g.lag0(), 1e-8));
            }
        }
    }

    #[test]
    fn determinism_ma_duplicate_and_short() {
        let windows: Vec<usize> = (1..=16).collect();
        let r = is_backward_deterministic_numeric(&ma_example(2.0).unwrap(), &windows, DEFAULT_DETERMINISM_THRESHOLD).unwrap();
        assert_eq!(r.verdict, Verdict::NotDeterministic);
        assert!((r.traces.last().unwrap() - 4.0).abs() < 1e-12);

        let g = Symbol::polynomial(&[1.0, 0.5]).unwrap();
        let dup = custom("gg", vec![g.clone(), g]).unwrap();
        let r = is_backward_deterministic_numeric(&dup, &windows, DEFAULT_DETERMINISM_THRESHOLD).unwrap();
        assert_eq!(r.verdict, Verdict::NotDeterministic);

        let r = is_backward_deterministic_with(
            &ma_example(2.0).unwrap(),
            &windows,
            DEFAULT_DETERMINISM_THRESHOLD,
            Solver::PseudoInverse { rank_tol: DEFAULT_RANK_TOL },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::NotDeterministic);
        assert!(r.non_increasing(1e-8));

        assert!(is_backward_deterministic_numeric(&dup, &[1, 2], 1e-10).is_err());
    }
}
