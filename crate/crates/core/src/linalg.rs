//! Small dense helpers shared by the numeric modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::CMatrix;

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).map(|v| v * 0.5)
}

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let d = a - a.adjoint();
    d.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// `lambda_min >= -tol`.
pub fn is_psd(a: &CMatrix, tol: f64) -> bool {
    min_eigenvalue(a) >= -tol
}

/// Loewner order `a <= b + tol * I`.
pub fn loewner_le(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    min_eigenvalue(&(b - a)) >= -tol
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn trace_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|v| v.re).sum()
}

/// Real part of the determinant of the Hermitian part.
pub fn hermitian_det(a: &CMatrix) -> f64 {
    hermitian_part(a).determinant().re
}

/// Lift a real matrix into the complex matrix type.
pub fn complexify(a: &DMatrix<f64>) -> CMatrix {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Evaluate `c_0 + c_1 z + ... + c_d z^d` by Horner's rule.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_derivative_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| acc * z + c * k as f64)
}

/// Drop trailing (highest-degree) zero coefficients.
pub fn trim_trailing_zeros(coeffs: &[Complex64]) -> &[Complex64] {
    let end = coeffs
        .iter()
        .rposition(|c| c.norm() != 0.0)
        .map_or(0, |i| i + 1);
    &coeffs[..end]
}

/// Roots of a polynomial given in ascending coefficient order.
///
/// Companion-matrix eigenvalues followed by two Newton polishing steps.
/// Returns an empty list for constants (and for the zero polynomial).
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let c = trim_trailing_zeros(coeffs);
    if c.len() <= 1 {
        return Vec::new();
    }
    let d = c.len() - 1;
    let lead = c[d];
    let mut comp = CMatrix::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        comp[(i, d - 1)] = -c[i] / lead;
    }
    let eig = comp
        .eigenvalues()
        .map(|v| v.iter().copied().collect::<Vec<_>>())
        .unwrap_or_default();
    eig.into_iter()
        .map(|mut z| {
            for _ in 0..2 {
                let dp = poly_derivative_eval(c, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = poly_eval(c, z) / dp;
                if !step.is_finite() {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect()
}
