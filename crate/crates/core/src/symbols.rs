//! Scalar generating functions `g(z) = sum_l g_l z^l` used as channel filters.
//!
//! Three kinds are supported: rational functions with all poles outside
//! the closed unit disk, the built-in harmonic series `g_l = 1/(1+l)`, and
//! explicit finite coefficient sequences.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{poly_eval, poly_roots, trim_trailing_zeros};
use crate::{Error, Result};

/// Default truncation for the harmonic symbol; tail norm-squared `<= 1/4096`.
pub const HARMONIC_TRUNCATION: usize = 4096;

/// Denominator roots with modulus at or below this are rejected.
pub const POLE_TOLERANCE: f64 = 1.0 + 1e-9;

/// Relative tail level used to pick default truncations of rational symbols.
const RATIONAL_TAIL_TARGET: f64 = 1e-30;

/// Upper bound on extra recurrence steps spent measuring a rational tail.
const MAX_TAIL_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Rational,
    Harmonic,
    Explicit,
}

/// Rational symbol `num(z) / den(z)` with ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    num: Vec<Complex64>,
    den: Vec<Complex64>,
    /// Smallest denominator root modulus; `None` for polynomials.
    pole_radius: Option<f64>,
}

impl Rational {
    pub fn numerator(&self) -> &[Complex64] {
        &self.num
    }

    pub fn denominator(&self) -> &[Complex64] {
        &self.den
    }

    pub fn pole_radius(&self) -> Option<f64> {
        self.pole_radius
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.len() == 1
    }

    /// Power-series coefficients by the long-division recurrence
    /// `a_l = (n_l - sum_{j>=1} d_j a_{l-j}) / d_0`.
    fn expand(&self, len: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(len);
        let d0 = self.den[0];
        for l in 0..len {
            let mut acc = self.num.get(l).copied().unwrap_or_default();
            for (j, d) in self.den.iter().enumerate().skip(1).take(l) {
                acc -= d * out[l - j];
            }
            out.push(acc / d0);
        }
        out
    }

    /// Norm-squared of all coefficients from index `start` on.
    fn tail_from(&self, start: usize) -> f64 {
        if self.is_polynomial() {
            let d0 = self.den[0];
            return self.num.iter().skip(start).map(|c| (c / d0).norm_sqr()).sum();
        }
        // Run the recurrence past `start` until the terms are negligible, then
        // close with a geometric remainder at a ratio strictly between the
        // pole decay rate and one.
        let radius = self.pole_radius.unwrap_or(f64::INFINITY);
        let q = 0.5 * (1.0 + 1.0 / radius);
        let order = self.den.len() - 1;
        let min_extra = 4 * order + self.num.len() + 8;
        let d0 = self.den[0];
        let mut hist: Vec<Complex64> = Vec::new();
        let mut acc = 0.0;
        let mut l = 0usize;
        loop {
            let mut a = self.num.get(l).copied().unwrap_or_default();
            for (j, d) in self.den.iter().enumerate().skip(1) {
                if j > l {
                    break;
                }
                a -= d * hist[hist.len() - j];
            }
            a /= d0;
            hist.push(a);
            if hist.len() > order.max(1) {
                hist.remove(0);
            }
            if l >= start {
                acc += a.norm_sqr();
                let extra = l - start;
                let recent = hist.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
                if extra >= min_extra && recent <= 1e-34 * acc.max(f64::MIN_POSITIVE) {
                    break;
                }
                if extra >= MAX_TAIL_STEPS {
                    break;
                }
            }
            l += 1;
        }
        let window_max = hist.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        acc + (order as f64 + 1.0) * window_max * q * q / (1.0 - q * q)
    }
}

/// A scalar analytic symbol. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Rational(Rational),
    Harmonic,
    Explicit(Vec<Complex64>),
}

/// A finite window of power-series coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientWindow {
    pub values: Vec<Complex64>,
    /// Upper bound on the norm-squared of the coefficients not in `values`.
    pub tail_bound: f64,
}

impl CoefficientWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `U*^k`: drop the first `k` coefficients.
    pub fn backward_shift(&self, k: usize) -> CoefficientWindow {
        backward_shift(self, k)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `U*^k (a_0, a_1, ...) = (a_k, a_{k+1}, ...)`. The tail bound is unchanged.
pub fn backward_shift(w: &CoefficientWindow, k: usize) -> CoefficientWindow {
    CoefficientWindow {
        values: w.values.iter().skip(k).copied().collect(),
        tail_bound: w.tail_bound,
    }
}

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Build a rational symbol `num(z)/den(z)`; coefficients are ascending.
pub fn make_rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Symbol> {
    let num = trim_trailing_zeros(&num).to_vec();
    let den = trim_trailing_zeros(&den).to_vec();
    if num.is_empty() {
        return Err(Error::EmptyNumerator);
    }
    if den.is_empty() {
        return Err(Error::EmptyDenominator);
    }
    if den[0].norm() == 0.0 {
        return Err(Error::PoleInDisk { modulus: 0.0 });
    }
    let pole_radius = if den.len() > 1 {
        let r = poly_roots(&den)
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min);
        if r <= POLE_TOLERANCE {
            return Err(Error::PoleInDisk { modulus: r });
        }
        Some(r)
    } else {
        None
    };
    Ok(Symbol::Rational(Rational { num, den, pole_radius }))
}

impl Symbol {
    pub fn harmonic() -> Symbol {
        Symbol::Harmonic
    }

    /// Rational symbol with real coefficients.
    pub fn rational(num: &[f64], den: &[f64]) -> Result<Symbol> {
        make_rational(real(num), real(den))
    }

    /// Polynomial symbol `c_0 + c_1 z + ...`.
    pub fn polynomial(coeffs: &[f64]) -> Result<Symbol> {
        make_rational(real(coeffs), vec![Complex64::new(1.0, 0.0)])
    }

    pub fn constant(c: f64) -> Result<Symbol> {
        Symbol::polynomial(&[c])
    }

    pub fn explicit(coeffs: Vec<Complex64>) -> Result<Symbol> {
        if coeffs.is_empty() || coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::EmptyCoefficients);
        }
        Ok(Symbol::Explicit(coeffs))
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Rational(_) => SymbolKind::Rational,
            Symbol::Harmonic => SymbolKind::Harmonic,
            Symbol::Explicit(_) => SymbolKind::Explicit,
        }
    }

    /// Number of coefficients if the expansion is finite.
    pub fn finite_len(&self) -> Option<usize> {
        match self {
            Symbol::Rational(r) if r.is_polynomial() => Some(r.num.len()),
            Symbol::Rational(_) | Symbol::Harmonic => None,
            Symbol::Explicit(c) => Some(trim_trailing_zeros(c).len()),
        }
    }

    pub fn is_real(&self) -> bool {
        let re = |v: &[Complex64]| v.iter().all(|c| c.im == 0.0);
        match self {
            Symbol::Rational(r) => re(&r.num) && re(&r.den),
            Symbol::Harmonic => true,
            Symbol::Explicit(c) => re(c),
        }
    }

    /// Truncation length used when the caller does not pick one.
    pub fn truncation_default(&self) -> usize {
        match self {
            Symbol::Harmonic => HARMONIC_TRUNCATION,
            Symbol::Explicit(c) => c.len(),
            Symbol::Rational(r) => match r.pole_radius {
                None => r.num.len(),
                Some(radius) => {
                    let decay = (1.0 / RATIONAL_TAIL_TARGET).ln() / (2.0 * radius.ln());
                    let extra = 4 * r.den.len();
                    ((decay.ceil() as usize) + r.num.len() + extra).min(1_000_000)
                }
            },
        }
    }

    /// First `len` coefficients without tail bookkeeping.
    pub fn coefficients(&self, len: usize) -> Vec<Complex64> {
        match self {
            Symbol::Rational(r) => r.expand(len),
            Symbol::Harmonic => (0..len)
                .map(|l| Complex64::new(1.0 / (1.0 + l as f64), 0.0))
                .collect(),
            Symbol::Explicit(c) => (0..len).map(|l| c.get(l).copied().unwrap_or_default()).collect(),
        }
    }

    /// Norm-squared of the coefficients with index `>= start` (an upper bound
    /// for infinite rational and harmonic expansions).
    pub fn tail_bound(&self, start: usize) -> f64 {
        // empty float sums are -0.0
        let bound: f64 = match self {
            Symbol::Rational(r) => r.tail_from(start),
            Symbol::Harmonic => {
                if start == 0 {
                    PI * PI / 6.0
                } else {
                    1.0 / start as f64
                }
            }
            Symbol::Explicit(c) => c.iter().skip(start).map(|v| v.norm_sqr()).sum(),
        };
        bound.abs()
    }

    /// First `len` coefficients plus a bound on the dropped norm-squared.
    pub fn taylor_coefficients(&self, len: usize) -> CoefficientWindow {
        CoefficientWindow {
            values: self.coefficients(len),
            tail_bound: self.tail_bound(len),
        }
    }

    /// `||g||_2^2`.
    pub fn norm_sqr(&self) -> f64 {
        match self {
            Symbol::Harmonic => PI * PI / 6.0,
            _ => {
                let l = self.truncation_default();
                self.taylor_coefficients(l).norm_sqr() + self.tail_bound(l)
            }
        }
    }

    /// Value at a point of the closed disk.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Rational(r) => poly_eval(&r.num, z) / poly_eval(&r.den, z),
            Symbol::Explicit(c) => poly_eval(c, z),
            Symbol::Harmonic => harmonic_value(z),
        }
    }

    /// Boundary value at `e^{i theta}`.
    pub fn evaluate_on_circle(&self, theta: f64) -> Complex64 {
        self.evaluate(Complex64::from_polar(1.0, theta))
    }
}

/// `sum_l z^l / (1+l) = -log(1-z)/z`.
///
/// At the boundary singularity `z = 1` the partial sum at the default
/// truncation is returned so grids stay finite.
fn harmonic_value(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if (one - z).norm() == 0.0 {
        let h: f64 = (1..=HARMONIC_TRUNCATION).map(|k| 1.0 / k as f64).sum();
        return Complex64::new(h, 0.0);
    }
    if z.norm() < 0.25 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut zp = one;
        for l in 0..64 {
            acc += zp / (1.0 + l as f64);
            zp *= z;
        }
        return acc;
    }
    -(one - z).ln() / z
}

fn fmt_coeff(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

fn fmt_poly(c: &[Complex64]) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() != 0.0)
        .map(|(k, &v)| match k {
            0 => fmt_coeff(v),
            1 => format!("{}z", fmt_coeff(v)),
            _ => format!("{}z^{k}", fmt_coeff(v)),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Harmonic => write!(f, "harmonic"),
            Symbol::Explicit(c) => write!(f, "explicit[{}]", fmt_poly(c)),
            Symbol::Rational(r) if r.is_polynomial() && r.den[0] == Complex64::new(1.0, 0.0) => {
                write!(f, "{}", fmt_poly(&r.num))
            }
            Symbol::Rational(r) => write!(f, "({}) / ({})", fmt_poly(&r.num), fmt_poly(&r.den)),
        }
    }
}

/// A coefficient on the wire: a bare number or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffValue {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Complex64> for CoeffValue {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            CoeffValue::Real(c.re)
        } else {
            CoeffValue::Complex([c.re, c.im])
        }
    }
}

impl From<CoeffValue> for Complex64 {
    fn from(c: CoeffValue) -> Self {
        match c {
            CoeffValue::Real(re) => Complex64::new(re, 0.0),
            CoeffValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// JSON form: `{"kind": "...", "num": [...], "den": [...], "coeffs": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub kind: SymbolKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<Vec<CoeffValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<CoeffValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<CoeffValue>>,
}

fn to_values(v: &[Complex64]) -> Vec<CoeffValue> {
    v.iter().map(|&c| c.into()).collect()
}

fn from_values(v: Option<Vec<CoeffValue>>) -> Vec<Complex64> {
    v.unwrap_or_default().into_iter().map(Into::into).collect()
}

impl From<&Symbol> for SymbolRecord {
    fn from(s: &Symbol) -> Self {
        match s {
            Symbol::Rational(r) => SymbolRecord {
                kind: SymbolKind::Rational,
                num: Some(to_values(&r.num)),
                den: Some(to_values(&r.den)),
                coeffs: None,
            },
            Symbol::Harmonic => SymbolRecord {
                kind: SymbolKind::Harmonic,
                num: None,
                den: None,
                coeffs: None,
            },
            Symbol::Explicit(c) => SymbolRecord {
                kind: SymbolKind::Explicit,
                num: None,
                den: None,
                coeffs: Some(to_values(c)),
            },
        }
    }
}

impl TryFrom<SymbolRecord> for Symbol {
    type Error = Error;

    fn try_from(r: SymbolRecord) -> Result<Symbol> {
        match r.kind {
            SymbolKind::Harmonic => Ok(Symbol::Harmonic),
            SymbolKind::Explicit => Symbol::explicit(from_values(r.coeffs)),
            SymbolKind::Rational => {
                let den = match r.den {
                    Some(d) => from_values(Some(d)),
                    None => vec![Complex64::new(1.0, 0.0)],
                };
                make_rational(from_values(r.num), den)
            }
        }
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymbolRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = SymbolRecord::deserialize(d)?;
        Symbol::try_from(rec).map_err(serde::de::Error::custom)
    }
}

impl Symbol {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbol records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Symbol> {
        Ok(serde_json::from_str(s)?)
    }
}
