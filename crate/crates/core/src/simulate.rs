//! Seeded sample paths and empirical checks against analytic moments.
//!
//! Noise comes from ChaCha20 seeded with a `u64` (`seed_from_u64`) and is
//! mapped to standard normals by the Ziggurat sampler of `rand_distr`.
//! Paths are generated on one thread so that a seed fixes the path.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::catalog::ProcessModel;
use crate::estimation::{Direction, PredictionSolution};
use crate::symbols::Symbol;
use crate::{AutocovarianceSequence, CMatrix, Complex64, Error, Result};

/// Recorded in path metadata.
pub const GENERATOR: &str = "chacha20 seed_from_u64 + rand_distr StandardNormal (ziggurat)";

/// Filter length for harmonic channels when none is requested.
pub const HARMONIC_SIM_TRUNCATION: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub n: usize,
    pub t: usize,
    /// `values[s][i]`: channel `i` at time `s`.
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    pub burn_in: usize,
    pub truncation: usize,
    pub generator: &'static str,
}

impl SamplePath {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (s, row) in self.values.iter().enumerate() {
            out.push_str(&s.to_string());
            for v in row {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Filter length used by [`sample_path`] callers that do not choose one.
pub fn default_sim_truncation(model: &ProcessModel) -> usize {
    model
        .channels
        .iter()
        .map(|s| match s {
            Symbol::Harmonic => HARMONIC_SIM_TRUNCATION,
            other => other.truncation_default().clamp(1, HARMONIC_SIM_TRUNCATION),
        })
        .max()
        .unwrap_or(1)
}

/// The raw standard-normal stream for `seed`.
pub fn noise_stream(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// `t` samples of `model`, filters truncated to `truncation` taps and a
/// burn-in of the same length.
pub fn sample_path(model: &ProcessModel, t: usize, seed: u64, truncation: usize) -> Result<SamplePath> {
    if t == 0 || truncation == 0 {
        return Err(Error::InvalidArgument("path length and truncation must be positive".into()));
    }
    if !model.is_real() {
        return Err(Error::ComplexUnsupported("simulation"));
    }
    let burn_in = truncation;
    let start = truncation + burn_in;
    let noise = noise_stream(seed, t + start);
    let taps: Vec<Vec<f64>> = model
        .channels
        .iter()
        .map(|s| {
            let mut c: Vec<f64> = s.coefficients(truncation).iter().map(|v| v.re).collect();
            while c.len() > 1 && c.last() == Some(&0.0) {
                c.pop();
            }
            c
        })
        .collect();
    let scale = model.noise_variance.sqrt();
    let values = (start..start + t)
        .map(|s| {
            taps.iter()
                .map(|c| scale * c.iter().enumerate().map(|(l, g)| g * noise[s - l]).sum::<f64>())
                .collect()
        })
        .collect();
    Ok(SamplePath {
        n: model.n(),
        t,
        values,
        seed,
        burn_in,
        truncation,
        generator: GENERATOR,
    })
}

/// Biased lag estimates `(1/T) sum_s xi_s xi_{s-k}^T` for `k = 0..=K`.
pub fn empirical_autocov(path: &SamplePath, max_lag: usize) -> Result<AutocovarianceSequence> {
    if 10 * max_lag >= path.t {
        return Err(Error::LagTooLarge { lag: max_lag, len: path.t });
    }
    let n = path.n;
    let inv_t = 1.0 / path.t as f64;
    let gammas = (0..=max_lag)
        .map(|k| {
            let mut g = vec![0.0; n * n];
            for s in k..path.t {
                let (a, b) = (&path.values[s], &path.values[s - k]);
                for i in 0..n {
                    for j in 0..n {
                        g[i * n + j] += a[i] * b[j];
                    }
                }
            }
            CMatrix::from_row_iterator(n, n, g.into_iter().map(|v| Complex64::new(v * inv_t, 0.0)))
        })
        .collect();
    AutocovarianceSequence::new(gammas, 0.0)
}

/// Mean outer product of the residuals of `sol` applied along the path.
pub fn empirical_prediction_error(path: &SamplePath, sol: &PredictionSolution) -> Result<CMatrix> {
    let p = sol.window;
    if path.t <= 10 * p {
        return Err(Error::WindowExceedsPath { window: p, len: path.t });
    }
    let n = path.n;
    if sol.error_covariance.nrows() != n {
        return Err(Error::ChannelMismatch { expected: n, found: sol.error_covariance.nrows() });
    }
    let col = |s: usize| CMatrix::from_iterator(n, 1, path.values[s].iter().map(|&v| Complex64::new(v, 0.0)));
    let times: Vec<usize> = match sol.direction {
        Direction::Forward => (p..path.t).collect(),
        Direction::Backward => (0..path.t - p).collect(),
    };
    let mut acc = CMatrix::zeros(n, n);
    for &s in &times {
        let mut e = col(s);
        for (j, a) in sol.coefficients.iter().enumerate() {
            let src = match sol.direction {
                Direction::Forward => s - (j + 1),
                Direction::Backward => s + j + 1,
            };
            e -= a * col(src);
        }
        acc += &e * e.adjoint();
    }
    Ok(acc / Complex64::new(times.len() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{custom, ma_example};
    use crate::covariance::autocov_default;
    use crate::estimation::{predict, DEFAULT_RANK_TOL};
    use crate::linalg::frobenius;

    fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
        frobenius(&(a - b)) / frobenius(b)
    }

    #[test]
    fn white_path_is_the_noise_stream() {
        let m = custom("w", vec![Symbol::constant(1.0).unwrap()]).unwrap();
        let p = sample_path(&m, 50, 9, 1).unwrap();
        let raw = noise_stream(9, 52);
        for s in 0..50 {
            assert_eq!(p.values[s][0], raw[s + 2]);
        }
    }

    #[test]
    fn reproducible() {
        let m = ma_example(2.0).unwrap();
        assert_eq!(sample_path(&m, 100, 4, 2).unwrap(), sample_path(&m, 100, 4, 2).unwrap());
        assert_ne!(sample_path(&m, 100, 4, 2).unwrap().values, sample_path(&m, 100, 5, 2).unwrap().values);
    }

    #[test]
    fn ma_lag_zero() {
        let m = ma_example(2.0).unwrap();
        let path = sample_path(&m, 100_000, 11, 2).unwrap();
        let g = empirical_autocov(&path, 1).unwrap();
        let exact = autocov_default(&m, 1).unwrap();
        assert!(rel(g.lag0(), exact.lag0()) < 0.05);
    }

    #[test]
    fn single_sample() {
        let m = ma_example(0.5).unwrap();
        let path = sample_path(&m, 1, 3, 2).unwrap();
        let g = empirical_autocov(&path, 0).unwrap();
        let x = &path.values[0];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.lag0()[(i, j)].re, x[i] * x[j]);
            }
        }
        assert!(matches!(empirical_autocov(&path, 1), Err(Error::LagTooLarge { .. })));
    }

    #[test]
    fn white_noise_moments_and_unpredictability() {
        let m = custom("w", vec![Symbol::constant(1.0).unwrap()]).unwrap();
        let path = sample_path(&m, 100_000, 21, 1).unwrap();
        let g = empirical_autocov(&path, 1).unwrap();
        assert!((g.lag0()[(0, 0)].re - 1.0).abs() < 0.03);
        assert!(g.gamma(1).unwrap()[(0, 0)].re.abs() < 0.03);
        let exact = autocov_default(&m, 1).unwrap();
        let sol = predict(&exact, 1, Direction::Forward, DEFAULT_RANK_TOL).unwrap();
        let e = empirical_prediction_error(&path, &sol).unwrap();
        // only the first sample is excluded from the residual average
        assert!((e[(0, 0)].re - g.lag0()[(0, 0)].re).abs() < 1e-3);
    }

    #[test]
    fn ma_prediction_errors() {
        let m = ma_example(2.0).unwrap();
        let path = sample_path(&m, 100_000, 5, 2).unwrap();
        let exact = autocov_default(&m, 1).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let sol = predict(&exact, 1, dir, DEFAULT_RANK_TOL).unwrap();
            let e = empirical_prediction_error(&path, &sol).unwrap();
            assert!(rel(&e, &sol.error_covariance) < 0.05, "{dir}");
        }
        let short = sample_path(&m, 10, 5, 2).unwrap();
        let sol = predict(&exact, 1, Direction::Forward, DEFAULT_RANK_TOL).unwrap();
        assert!(matches!(empirical_prediction_error(&short, &sol), Err(Error::WindowExceedsPath { .. })));
    }
}
