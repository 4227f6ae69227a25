//! Autocovariances in multiprecision arithmetic.
//!
//! Lag sums are evaluated without a fixed truncation: finite expansions are
//! summed exactly, rational tails are summed until they fall below the
//! working precision, and the harmonic-harmonic pairing uses the closed
//! forms `sum_l 1/((1+l)(1+l+k)) = H_k / k` and `zeta(2)` at lag zero.
//! Only real-coefficient models are supported.

use rug::float::Constant;
use rug::Float;

use crate::catalog::ProcessModel;
use crate::symbols::Symbol;
use crate::{AutocovarianceSequence, CMatrix, Complex64, Error, Result};

/// Real autocovariance lags `Gamma_0..Gamma_K` at `prec` bits.
#[derive(Debug, Clone)]
pub struct ExtendedAutocov {
    n: usize,
    prec: u32,
    /// `gammas[k][i * n + j] = Gamma_k(i, j)`.
    gammas: Vec<Vec<Float>>,
}

impl ExtendedAutocov {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn max_lag(&self) -> usize {
        self.gammas.len() - 1
    }

    /// `Gamma_k(i, j)` for `|k| <= K`, reflecting negative lags.
    pub fn entry(&self, k: i64, i: usize, j: usize) -> &Float {
        let idx = k.unsigned_abs() as usize;
        if k >= 0 {
            &self.gammas[idx][i * self.n + j]
        } else {
            &self.gammas[idx][j * self.n + i]
        }
    }

    /// Rounded to double precision.
    pub fn to_f64(&self) -> AutocovarianceSequence {
        let gammas = self
            .gammas
            .iter()
            .map(|g| CMatrix::from_row_iterator(self.n, self.n, g.iter().map(|v| Complex64::new(v.to_f64(), 0.0))))
            .collect();
        AutocovarianceSequence::new(gammas, 0.0).expect("square lags")
    }
}

/// Number of terms after which a geometric tail drops below `2^-(prec+64)`.
fn geometric_terms(symbol: &Symbol, prec: u32) -> Option<usize> {
    match symbol {
        Symbol::Rational(r) => r.pole_radius().map(|radius| {
            let per_bit = std::f64::consts::LN_2 / radius.ln();
            let base = (f64::from(prec) + 64.0) * per_bit;
            (base * 1.1).ceil() as usize + 8 * r.denominator().len() + r.numerator().len()
        }),
        _ => None,
    }
}

fn mp_coefficients(symbol: &Symbol, len: usize, prec: u32) -> Vec<Float> {
    match symbol {
        Symbol::Harmonic => (0..len).map(|l| Float::with_val(prec, 1u32) / Float::with_val(prec, l + 1)).collect(),
        Symbol::Explicit(c) => (0..len)
            .map(|l| Float::with_val(prec, c.get(l).map_or(0.0, |v| v.re)))
            .collect(),
        Symbol::Rational(r) => {
            let num: Vec<Float> = r.numerator().iter().map(|c| Float::with_val(prec, c.re)).collect();
            let den: Vec<Float> = r.denominator().iter().map(|c| Float::with_val(prec, c.re)).collect();
            let mut out: Vec<Float> = Vec::with_capacity(len);
            let mut tmp = Float::new(prec);
            for l in 0..len {
                let mut acc = num.get(l).cloned().unwrap_or_else(|| Float::new(prec));
                for (j, d) in den.iter().enumerate().skip(1).take(l) {
                    tmp.assign_mul(d, &out[l - j]);
                    acc -= &tmp;
                }
                acc /= &den[0];
                out.push(acc);
            }
            out
        }
    }
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

/// Terms needed to evaluate `sum_l a_{l+k} b_l` to working precision, or
/// `None` when both are harmonic.
fn terms_needed(a: &Symbol, b: &Symbol, k: usize, prec: u32) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut take = |v: usize| best = Some(best.map_or(v, |b: usize| b.min(v)));
    if let Some(la) = a.finite_len() {
        take(la.saturating_sub(k));
    }
    if let Some(lb) = b.finite_len() {
        take(lb);
    }
    if let Some(ga) = geometric_terms(a, prec) {
        take(ga);
    }
    if let Some(gb) = geometric_terms(b, prec) {
        take(gb);
    }
    best
}

/// Autocovariances to lag `max_lag` at `prec` bits.
pub fn extended_autocov(model: &ProcessModel, max_lag: usize, prec: u32) -> Result<ExtendedAutocov> {
    if !model.is_real() {
        return Err(Error::ComplexUnsupported("extended-precision autocovariance"));
    }
    let n = model.n();
    let ch = &model.channels;

    // coefficient lengths required per channel
    let mut need = vec![0usize; n];
    for (i, a) in ch.iter().enumerate() {
        for (j, b) in ch.iter().enumerate() {
            if let Some(t) = terms_needed(a, b, 0, prec) {
                need[i] = need[i].max(t + max_lag);
                need[j] = need[j].max(t);
            }
        }
    }
    let coeffs: Vec<Vec<Float>> = ch.iter().zip(&need).map(|(s, &len)| mp_coefficients(s, len, prec)).collect();

    let zeta2 = {
        let pi = Float::with_val(prec, Constant::Pi);
        Float::with_val(prec, &pi * &pi) / 6u32
    };
    let mut harmonic_numbers = vec![Float::new(prec)];
    for k in 1..=max_lag {
        let next = Float::with_val(prec, &harmonic_numbers[k - 1] + Float::with_val(prec, 1u32) / Float::with_val(prec, k));
        harmonic_numbers.push(next);
    }

    let mut gammas = Vec::with_capacity(max_lag + 1);
    let mut tmp = Float::new(prec);
    for k in 0..=max_lag {
        let mut g = Vec::with_capacity(n * n);
        for (i, a) in ch.iter().enumerate() {
            for (j, b) in ch.iter().enumerate() {
                let v = match terms_needed(a, b, k, prec) {
                    None if k == 0 => zeta2.clone(),
                    None => Float::with_val(prec, &harmonic_numbers[k] / k as u32),
                    Some(t) => {
                        let mut acc = Float::new(prec);
                        for l in 0..t {
                            let (Some(x), Some(y)) = (coeffs[i].get(l + k), coeffs[j].get(l)) else {
                                break;
                            };
                            tmp.assign_mul(x, y);
                            acc += &tmp;
                        }
                        acc
                    }
                };
                g.push(v);
            }
        }
        gammas.push(g);
    }
    Ok(ExtendedAutocov { n, prec, gammas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{custom, harmonic_example, ma_example};
    use crate::covariance::autocov_default;
    use crate::linalg::max_abs;

    #[test]
    fn matches_double_precision_for_finite_and_rational() {
        let models = [
            ma_example(2.0).unwrap(),
            custom(
                "r",
                vec![
                    Symbol::rational(&[1.0, 0.3], &[1.0, -0.6, 0.08]).unwrap(),
                    Symbol::polynomial(&[0.5, -1.0]).unwrap(),
                ],
            )
            .unwrap(),
        ];
        for m in models {
            let ext = extended_autocov(&m, 5, 256).unwrap().to_f64();
            let dbl = autocov_default(&m, 5).unwrap();
            for k in 0..=5 {
                let d = max_abs(&(ext.gamma(k).unwrap() - dbl.gamma(k).unwrap()));
                assert!(d < 1e-13, "{} lag {k}: {d}", m.name);
            }
        }
    }

    #[test]
    fn harmonic_closed_forms() {
        let ext = extended_autocov(&harmonic_example(), 4, 200).unwrap();
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((ext.entry(0, 0, 0).to_f64() - zeta2).abs() < 1e-15);
        assert!((ext.entry(3, 0, 0).to_f64() - (1.0 + 0.5 + 1.0 / 3.0) / 3.0).abs() < 1e-15);
        assert_eq!(ext.entry(2, 0, 1).to_f64(), 1.0 / 3.0);
        assert_eq!(ext.entry(2, 1, 0).to_f64(), 0.0);
        assert_eq!(ext.entry(-2, 1, 0).to_f64(), 1.0 / 3.0);
        // against the long truncated double sum
        let dbl = autocov_default(&harmonic_example(), 4).unwrap();
        for k in 0..=4 {
            let d = (ext.entry(k, 0, 0).to_f64() - dbl.gamma(k).unwrap()[(0, 0)].re).abs();
            assert!(d <= dbl.truncation_error);
        }
    }

    #[test]
    fn harmonic_times_rational_converges() {
        let m = custom(
            "hr",
            vec![Symbol::Harmonic, Symbol::rational(&[1.0], &[1.0, -0.5]).unwrap()],
        )
        .unwrap();
        let ext = extended_autocov(&m, 2, 300).unwrap();
        // sum_l 0.5^l / (1 + l + k), compared with a long double sum
        for k in 0..=2 {
            let oracle: f64 = (0..200).map(|l| 0.5f64.powi(l) / (1.0 + l as f64 + k as f64)).sum();
            assert!((ext.entry(k, 0, 1).to_f64() - oracle).abs() < 1e-15);
        }
    }

    #[test]
    fn complex_models_rejected() {
        let m = custom("c", vec![Symbol::explicit(vec![Complex64::new(0.0, 1.0)]).unwrap()]).unwrap();
        assert!(matches!(extended_autocov(&m, 1, 64), Err(Error::ComplexUnsupported(_))));
    }
}
