//! Boundary spectral densities and the log-integral identities.
//!
//! The one-step prediction error of a scalar process is the geometric mean
//! `exp((1/2pi) int log phi)`; for vector processes only the determinant of
//! the error covariance has such a formula, `exp((1/2pi) int log det Phi)`.
//! Both integrals are evaluated with the uniform trapezoid rule, which is
//! spectrally accurate for smooth periodic integrands.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{ma_example, ProcessModel};
use crate::linalg::{frobenius, hermitian_defect, hermitian_det, hermitian_eigenvalues, hermitian_part};
use crate::symbols::Symbol;
use crate::{CMatrix, Error, Result};

/// Densities (or determinants) below this are treated as exactly zero.
pub const LOG_FLOOR: f64 = 1e-13;

pub const DEFAULT_GRID: usize = 4096;

/// `Phi(theta_j) = G(theta_j) G(theta_j)*` on `M` uniform angles in `[-pi, pi)`.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub thetas: Vec<f64>,
    pub values: Vec<CMatrix>,
}

/// A quadrature result with the number of floor hits that forced it to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub grid_size: usize,
    pub floor_hits: usize,
}

pub fn check_grid_size(m: usize) -> Result<()> {
    if m < 8 || !m.is_power_of_two() {
        return Err(Error::InvalidGrid(m));
    }
    Ok(())
}

/// Uniform angles `-pi + 2 pi j / M`.
pub fn grid_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| -PI + 2.0 * PI * j as f64 / m as f64).collect()
}

impl SpectralGrid {
    pub fn size(&self) -> usize {
        self.thetas.len()
    }

    pub fn n(&self) -> usize {
        self.values.first().map_or(0, |v| v.nrows())
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        self.values.iter().map(hermitian_defect).fold(0.0, f64::max)
    }

    /// Largest ratio `lambda_2 / lambda_1` over the grid (0 for scalars).
    pub fn max_rank_ratio(&self) -> f64 {
        self.values
            .iter()
            .map(|v| {
                let e = hermitian_eigenvalues(v);
                let k = e.len();
                if k < 2 || e[k - 1] <= 0.0 {
                    0.0
                } else {
                    e[k - 2].abs() / e[k - 1]
                }
            })
            .fold(0.0, f64::max)
    }

    /// `(1/M) sum_j Phi(theta_j) e^{-i k theta_j}`, which approximates the
    /// lag-`k` autocovariance `E[xi_t xi_{t-k}*]`.
    pub fn inverse_transform(&self, k: i64) -> CMatrix {
        let n = self.n();
        let m = self.size() as f64;
        self.thetas
            .iter()
            .zip(&self.values)
            .fold(CMatrix::zeros(n, n), |acc, (&t, v)| {
                acc + v * Complex64::from_polar(1.0 / m, -(k as f64) * t)
            })
    }

    /// `(theta_j, det Phi(theta_j))`.
    pub fn det_curve(&self) -> Vec<(f64, f64)> {
        self.thetas
            .iter()
            .zip(&self.values)
            .map(|(&t, v)| (t, hermitian_det(v)))
            .collect()
    }
}

fn stacked_boundary(model: &ProcessModel, theta: f64) -> CMatrix {
    CMatrix::from_iterator(
        model.n(),
        1,
        model.channels.iter().map(|s| s.evaluate_on_circle(theta)),
    )
}

pub fn spectrum_grid(model: &ProcessModel, m: usize) -> Result<SpectralGrid> {
    check_grid_size(m)?;
    let thetas = grid_angles(m);
    let values = thetas
        .par_iter()
        .map(|&t| {
            let g = stacked_boundary(model, t);
            hermitian_part(&(&g * g.adjoint()))
        })
        .collect();
    Ok(SpectralGrid { thetas, values })
}

/// `|g(e^{i theta_j})|^2` on the grid.
pub fn scalar_density(symbol: &Symbol, m: usize) -> Result<Vec<f64>> {
    check_grid_size(m)?;
    Ok(grid_angles(m)
        .par_iter()
        .map(|&t| symbol.evaluate_on_circle(t).norm_sqr())
        .collect())
}

fn log_mean(values: &[f64]) -> Result<QuadratureValue> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeDensity { index, value });
    }
    let floor_hits = values.iter().filter(|&&v| v < LOG_FLOOR).count();
    let value = if floor_hits > 0 || values.is_empty() {
        0.0
    } else {
        (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
    };
    Ok(QuadratureValue {
        value,
        grid_size: values.len(),
        floor_hits,
    })
}

/// Geometric mean `exp(mean(log d))` of a density sampled on a uniform grid.
pub fn szego_mean(density: &[f64]) -> Result<f64> {
    Ok(szego_report(density)?.value)
}

pub fn szego_report(density: &[f64]) -> Result<QuadratureValue> {
    log_mean(density)
}

/// `exp(mean(log det Phi))`; exactly 0 when `det Phi` drops below the floor.
pub fn wiener_masani_det(grid: &SpectralGrid) -> f64 {
    wiener_masani_report(grid).value
}

pub fn wiener_masani_report(grid: &SpectralGrid) -> QuadratureValue {
    let dets: Vec<f64> = grid.values.iter().map(hermitian_det).collect();
    let floor_hits = dets.iter().filter(|&&d| !(d >= LOG_FLOOR)).count();
    let value = if floor_hits > 0 || dets.is_empty() {
        0.0
    } else {
        (dets.iter().map(|d| d.ln()).sum::<f64>() / dets.len() as f64).exp()
    };
    QuadratureValue {
        value,
        grid_size: dets.len(),
        floor_hits,
    }
}

/// Largest Frobenius discrepancy between the spectrum of the moving-average
/// example and its two analytic factorizations
///
/// ```text
/// Phi = [1 + a z; 1] [1 + a/z, 1] = [1/z + a; 1/z] [z + a, z]
/// ```
pub fn ma_factorization_check(alpha: f64, m: usize) -> Result<f64> {
    let model = ma_example(alpha)?;
    let grid = spectrum_grid(&model, m)?;
    let one = Complex64::new(1.0, 0.0);
    let err = grid
        .thetas
        .iter()
        .zip(&grid.values)
        .map(|(&t, phi)| {
            let z = Complex64::from_polar(1.0, t);
            let zi = z.inv();
            let left = CMatrix::from_column_slice(2, 1, &[one + alpha * z, one]);
            let left_row = CMatrix::from_row_slice(1, 2, &[one + alpha * zi, one]);
            let right = CMatrix::from_column_slice(2, 1, &[zi + alpha, zi]);
            let right_row = CMatrix::from_row_slice(1, 2, &[z + alpha, z]);
            let e1 = frobenius(&(&left * &left_row - phi));
            let e2 = frobenius(&(&right * &right_row - phi));
            e1.max(e2)
        })
        .fold(0.0, f64::max);
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{custom, harmonic_example};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ma_spectrum_at_zero() {
        let grid = spectrum_grid(&ma_example(2.0).unwrap(), 8).unwrap();
        let j = grid.thetas.iter().position(|&t| t == 0.0).unwrap();
        let phi = &grid.values[j];
        let expect = [[9.0, 3.0], [3.0, 1.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(phi[(r, c)].re, expect[r][c], epsilon = 1e-14);
                assert_abs_diff_eq!(phi[(r, c)].im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn white_noise_spectrum_is_flat() {
        let model = custom("w", vec![Symbol::constant(1.0).unwrap()]).unwrap();
        let grid = spectrum_grid(&model, 16).unwrap();
        assert!(grid.values.iter().all(|v| (v[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn ma_spectrum_is_rank_one() {
        for alpha in [0.5, 2.0, -1.3] {
            let grid = spectrum_grid(&ma_example(alpha).unwrap(), 64).unwrap();
            for v in &grid.values {
                assert!(hermitian_det(v).abs() < 1e-12);
            }
            assert!(grid.max_rank_ratio() <= 1e-8);
            assert!(grid.max_hermitian_defect() <= 1e-10);
        }
    }

    #[test]
    fn bad_grid_sizes() {
        assert!(matches!(spectrum_grid(&harmonic_example(), 4), Err(Error::InvalidGrid(4))));
        assert!(matches!(spectrum_grid(&harmonic_example(), 24), Err(Error::InvalidGrid(24))));
    }

    #[test]
    fn szego_constant_and_floor() {
        assert_abs_diff_eq!(szego_mean(&[4.0; 64]).unwrap(), 4.0, epsilon = 1e-14);
        let mut d = vec![1.0; 64];
        d[3] = 1e-14;
        let r = szego_report(&d).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.floor_hits, 1);
        d[3] = -1e-3;
        assert!(matches!(szego_mean(&d), Err(Error::NegativeDensity { index: 3, .. })));
    }

    #[test]
    fn szego_ma_densities() {
        // closed forms max(1, |a|)^2, confirmed by adaptive high-precision quadrature
        let inner = scalar_density(&Symbol::polynomial(&[1.0, 0.5]).unwrap(), 4096).unwrap();
        assert_abs_diff_eq!(szego_mean(&inner).unwrap(), 1.0, epsilon = 1e-6);
        let outer = scalar_density(&Symbol::polynomial(&[1.0, 2.0]).unwrap(), 4096).unwrap();
        assert_abs_diff_eq!(szego_mean(&outer).unwrap(), 4.0, epsilon = 1e-6);
    }

    #[test]
    fn wiener_masani_cases() {
        let ma = spectrum_grid(&ma_example(2.0).unwrap(), 4096).unwrap();
        assert_eq!(wiener_masani_det(&ma), 0.0);
        let h = spectrum_grid(&harmonic_example(), 4096).unwrap();
        let r = wiener_masani_report(&h);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.floor_hits, 4096);

        let two = Complex64::new(2.0, 0.0);
        let diag = SpectralGrid {
            thetas: grid_angles(8),
            values: vec![CMatrix::from_diagonal(&nalgebra::dvector![two, Complex64::new(3.0, 0.0)]); 8],
        };
        assert_abs_diff_eq!(wiener_masani_det(&diag), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn factorization_identity() {
        for (alpha, m) in [(2.0, 512), (0.5, 512), (1.0, 8)] {
            assert!(ma_factorization_check(alpha, m).unwrap() <= 1e-12);
        }
        assert!(matches!(ma_factorization_check(0.0, 8), Err(Error::ZeroAlpha)));
    }

    #[test]
    fn inverse_transform_recovers_ma_lags() {
        let grid = spectrum_grid(&ma_example(2.0).unwrap(), 64).unwrap();
        let g1 = grid.inverse_transform(1);
        assert_abs_diff_eq!(g1[(0, 0)].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g1[(0, 1)].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g1[(1, 0)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(grid.inverse_transform(2)[(0, 0)].norm(), 0.0, epsilon = 1e-12);
    }
}
