//! Autocovariance sequences of rank-one models and block-Toeplitz windows.
//!
//! Convention: `Gamma_k = E[xi_t xi_{t-k}*] = sum_l G_{l+k} G_l*`. Only lags
//! `k >= 0` are stored; `Gamma_{-k} = Gamma_k*` is produced on access.

pub mod extended;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::catalog::ProcessModel;
use crate::estimation::Direction;
use crate::linalg::{hermitian_part, max_abs};
use crate::symbols::Symbol;
use crate::{CMatrix, Error, Result};

/// Truncation used for models containing the harmonic symbol: entries are
/// then accurate to about `1e-5`.
pub const HARMONIC_AUTOCOV_TRUNCATION: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceSequence {
    n: usize,
    gammas: Vec<CMatrix>,
    /// Bound on the entrywise error caused by truncating the filters.
    pub truncation_error: f64,
}

impl AutocovarianceSequence {
    /// Wrap lags `Gamma_0..Gamma_K`.
    pub fn new(gammas: Vec<CMatrix>, truncation_error: f64) -> Result<Self> {
        let n = gammas.first().map(|g| g.nrows()).ok_or_else(|| {
            Error::InvalidArgument("autocovariance needs at least lag 0".into())
        })?;
        if let Some(bad) = gammas.iter().find(|g| g.nrows() != n || g.ncols() != n) {
            return Err(Error::ChannelMismatch {
                expected: n,
                found: bad.nrows().max(bad.ncols()),
            });
        }
        let mut gammas = gammas;
        gammas[0] = hermitian_part(&gammas[0]);
        Ok(AutocovarianceSequence { n, gammas, truncation_error })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_lag(&self) -> usize {
        self.gammas.len() - 1
    }

    pub fn lag0(&self) -> &CMatrix {
        &self.gammas[0]
    }

    /// Stored lags `Gamma_0..Gamma_K`.
    pub fn lags(&self) -> &[CMatrix] {
        &self.gammas
    }

    /// `Gamma_k` for any `|k| <= K`.
    pub fn gamma(&self, k: i64) -> Result<CMatrix> {
        let idx = k.unsigned_abs() as usize;
        let g = self.gammas.get(idx).ok_or(Error::LagUnavailable {
            requested: idx,
            available: self.max_lag(),
        })?;
        Ok(if k >= 0 { g.clone() } else { g.adjoint() })
    }

    /// Autocovariance of the time-reversed process, `Gamma~_k = Gamma_k*`.
    pub fn reversed(&self) -> AutocovarianceSequence {
        AutocovarianceSequence {
            n: self.n,
            gammas: self.gammas.iter().map(|g| g.adjoint()).collect(),
            truncation_error: self.truncation_error,
        }
    }

    /// Orientation used for estimation in `direction`.
    pub fn oriented(&self, direction: Direction) -> AutocovarianceSequence {
        match direction {
            Direction::Forward => self.clone(),
            Direction::Backward => self.reversed(),
        }
    }

    /// `lag,row,col,value` rows (plus `imag` when any entry is complex).
    pub fn to_csv(&self) -> String {
        let complex = self.gammas.iter().any(|g| g.iter().any(|v| v.im != 0.0));
        let mut out = String::from(if complex { "lag,row,col,value,imag\n" } else { "lag,row,col,value\n" });
        for (k, g) in self.gammas.iter().enumerate() {
            for r in 0..self.n {
                for c in 0..self.n {
                    let v = g[(r, c)];
                    if complex {
                        out.push_str(&format!("{k},{r},{c},{:e},{:e}\n", v.re, v.im));
                    } else {
                        out.push_str(&format!("{k},{r},{c},{:e}\n", v.re));
                    }
                }
            }
        }
        out
    }
}

/// Truncation `autocov` uses when none is given.
pub fn default_truncation(model: &ProcessModel, max_lag: usize) -> usize {
    let base = if model.channels.iter().any(|s| matches!(s, Symbol::Harmonic)) {
        HARMONIC_AUTOCOV_TRUNCATION
    } else {
        model.truncation_default()
    };
    base.max(max_lag + 1)
}

/// `Gamma_0..Gamma_K` from the first `truncation` filter coefficients.
pub fn autocov(model: &ProcessModel, max_lag: usize, truncation: usize) -> Result<AutocovarianceSequence> {
    if truncation <= max_lag {
        return Err(Error::TruncationTooShort {
            truncation,
            required: max_lag,
        });
    }
    let n = model.n();
    let windows: Vec<_> = model
        .channels
        .iter()
        .map(|s| s.taylor_coefficients(truncation))
        .collect();
    let gammas: Vec<CMatrix> = (0..=max_lag)
        .into_par_iter()
        .map(|k| {
            let mut g = CMatrix::zeros(n, n);
            for (i, a) in windows.iter().enumerate() {
                for (j, b) in windows.iter().enumerate() {
                    g[(i, j)] = a.values[k..]
                        .iter()
                        .zip(&b.values)
                        .map(|(x, y)| x * y.conj())
                        .sum::<Complex64>();
                }
            }
            g
        })
        .collect();

    // |sum_{l >= L-k} a_{l+k} conj(b_l)| <= sqrt(tail_a(L)) sqrt(tail_b(L-k))
    let mut err = 0.0f64;
    for k in 0..=max_lag {
        for a in &windows {
            for b in &windows {
                let b_tail = b.tail_bound + b.values[truncation - k..].iter().map(|v| v.norm_sqr()).sum::<f64>();
                err = err.max((a.tail_bound * b_tail).sqrt());
            }
        }
    }
    AutocovarianceSequence::new(gammas, err)
}

/// [`autocov`] at the model's default truncation.
pub fn autocov_default(model: &ProcessModel, max_lag: usize) -> Result<AutocovarianceSequence> {
    autocov(model, max_lag, default_truncation(model, max_lag))
}

/// Covariance of a stacked window of `p` samples adjacent to the present.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowMatrix {
    pub n: usize,
    pub window: usize,
    pub direction: Direction,
    pub body: CMatrix,
}

impl WindowMatrix {
    /// Block `(i, j)` as an `n x n` matrix.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        self.body.view((i * self.n, j * self.n), (self.n, self.n)).into_owned()
    }
}

fn check_window(gamma: &AutocovarianceSequence, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    if p > gamma.max_lag() {
        return Err(Error::LagUnavailable {
            requested: p,
            available: gamma.max_lag(),
        });
    }
    Ok(())
}

/// Forward: covariance of `(xi_{-1}, ..., xi_{-p})`, block `(i, j) = Gamma_{j-i}`.
/// Backward: covariance of `(xi_1, ..., xi_p)`, block `(i, j) = Gamma_{i-j}`.
pub fn window_matrix(gamma: &AutocovarianceSequence, p: usize, direction: Direction) -> Result<WindowMatrix> {
    check_window(gamma, p)?;
    let g = gamma.oriented(direction);
    let n = g.n();
    let mut body = CMatrix::zeros(n * p, n * p);
    for i in 0..p {
        for j in 0..p {
            let blk = g.gamma(j as i64 - i as i64)?;
            body.view_mut((i * n, j * n), (n, n)).copy_from(&blk);
        }
    }
    Ok(WindowMatrix {
        n,
        window: p,
        direction,
        body: hermitian_part(&body),
    })
}

/// `E[xi_0 v*]` for the stacked window `v`: `[Gamma_1 .. Gamma_p]` forward,
/// `[Gamma_1* .. Gamma_p*]` backward, as an `n x np` matrix.
pub fn cross_blocks(gamma: &AutocovarianceSequence, p: usize, direction: Direction) -> Result<CMatrix> {
    check_window(gamma, p)?;
    let g = gamma.oriented(direction);
    let n = g.n();
    let mut c = CMatrix::zeros(n, n * p);
    for j in 0..p {
        c.view_mut((0, j * n), (n, n)).copy_from(&g.gamma(j as i64 + 1)?);
    }
    Ok(c)
}

/// `max_k |Gamma_k - Gamma_{-k}*|`; zero by construction.
pub fn reflection_defect(gamma: &AutocovarianceSequence) -> f64 {
    (0..=gamma.max_lag() as i64)
        .map(|k| {
            let pos = gamma.gamma(k).expect("stored lag");
            let neg = gamma.gamma(-k).expect("stored lag");
            max_abs(&(pos - neg.adjoint()))
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{custom, harmonic_example, ma_example};
    use crate::linalg::{hermitian_eigenvalues, is_psd};
    use approx::assert_abs_diff_eq;

    fn assert_re(m: &CMatrix, expect: &[&[f64]], tol: f64) {
        for (r, row) in expect.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert_abs_diff_eq!(m[(r, c)].re, v, epsilon = tol);
                assert_abs_diff_eq!(m[(r, c)].im, 0.0, epsilon = tol);
            }
        }
    }

    #[test]
    fn ma_lags_match_expansion() {
        // E[xi_t xi_{t-k}*] over orthonormal w for x = w_t + a w_{t-1}, y = w_t
        for alpha in [0.5, 2.0, -1.5] {
            let g = autocov_default(&ma_example(alpha).unwrap(), 4).unwrap();
            assert_re(&g.gamma(0).unwrap(), &[&[1.0 + alpha * alpha, 1.0], &[1.0, 1.0]], 1e-15);
            assert_re(&g.gamma(1).unwrap(), &[&[alpha, alpha], &[0.0, 0.0]], 1e-15);
            for k in 2..=4 {
                assert_eq!(max_abs(&g.gamma(k).unwrap()), 0.0);
            }
            assert_eq!(g.truncation_error, 0.0);
        }
    }

    #[test]
    fn harmonic_lag_closed_forms() {
        let g = autocov(&harmonic_example(), 6, HARMONIC_AUTOCOV_TRUNCATION).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((g.gamma(0).unwrap()[(0, 0)].re - zeta2).abs() <= g.truncation_error);
        assert!(g.truncation_error <= 1.1e-5);
        let mut h = 0.0;
        for k in 1..=6 {
            h += 1.0 / k as f64;
            // sum_l 1/((1+l)(1+l+k)) = H_k / k by partial fractions
            let v = g.gamma(k as i64).unwrap()[(0, 0)].re;
            assert!((v - h / k as f64).abs() <= g.truncation_error, "lag {k}");
            assert_abs_diff_eq!(g.gamma(k as i64).unwrap()[(0, 1)].re, 1.0 / (1.0 + k as f64), epsilon = 1e-15);
        }
    }

    #[test]
    fn reflection_on_access() {
        let m = custom(
            "c",
            vec![
                Symbol::explicit(vec![Complex64::new(1.0, 0.5), Complex64::new(0.0, -2.0)]).unwrap(),
                Symbol::polynomial(&[0.3, 1.0, 0.2]).unwrap(),
            ],
        )
        .unwrap();
        let g = autocov_default(&m, 3).unwrap();
        assert_eq!(reflection_defect(&g), 0.0);
        assert!(matches!(g.gamma(4), Err(Error::LagUnavailable { .. })));
        assert!(g.to_csv().starts_with("lag,row,col,value,imag\n"));
    }

    #[test]
    fn truncation_must_exceed_lag() {
        assert!(matches!(
            autocov(&harmonic_example(), 10, 10),
            Err(Error::TruncationTooShort { .. })
        ));
    }

    #[test]
    fn window_layouts() {
        let g = autocov_default(&ma_example(2.0).unwrap(), 3).unwrap();
        let w1 = window_matrix(&g, 1, Direction::Forward).unwrap();
        assert_re(&w1.body, &[&[5.0, 1.0], &[1.0, 1.0]], 0.0);
        let b1 = window_matrix(&g, 1, Direction::Backward).unwrap();
        assert_eq!(b1.body, w1.body);

        let w2 = window_matrix(&g, 2, Direction::Forward).unwrap();
        assert_re(&w2.block(0, 1), &[&[2.0, 2.0], &[0.0, 0.0]], 0.0);
        assert_re(&w2.block(1, 0), &[&[2.0, 0.0], &[2.0, 0.0]], 0.0);
        assert_re(&w2.block(1, 1), &[&[5.0, 1.0], &[1.0, 1.0]], 0.0);
        let b2 = window_matrix(&g, 2, Direction::Backward).unwrap();
        assert_eq!(b2.block(0, 1), w2.block(1, 0));

        let c = cross_blocks(&g, 2, Direction::Forward).unwrap();
        assert_re(&c, &[&[2.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0]], 0.0);
        let cb = cross_blocks(&g, 2, Direction::Backward).unwrap();
        assert_re(&cb, &[&[2.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0]], 0.0);

        assert!(matches!(window_matrix(&g, 4, Direction::Forward), Err(Error::LagUnavailable { .. })));
    }

    #[test]
    fn windows_are_psd_toeplitz() {
        for model in [ma_example(0.5).unwrap(), harmonic_example()] {
            let g = autocov(&model, 12, 20_000).unwrap();
            for dir in [Direction::Forward, Direction::Backward] {
                let w = window_matrix(&g, 12, dir).unwrap();
                let e = hermitian_eigenvalues(&w.body);
                assert!(e[0] >= -1e-8 * e[e.len() - 1]);
                for i in 0..11 {
                    assert_eq!(w.block(i, i + 1), w.block(0, 1));
                }
            }
            assert!(is_psd(g.lag0(), 1e-10));
        }
    }
}
