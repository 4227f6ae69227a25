//! Backward-shift cyclicity of symbols, determinism rules for symbol
//! families, and the Hilbert-matrix tools behind the harmonic example.
//!
//! Cyclicity is decided at the level of symbol kinds only: rational
//! symbols (polynomials included) have meromorphic pseudocontinuations and
//! are non-cyclic, the harmonic symbol is cyclic. The residual probe gives
//! numerical evidence about how well a backward orbit spans a target; it
//! never certifies a label.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::symbols::{CoefficientWindow, Symbol};
use crate::{Complex64, Error, Result};

/// Relative threshold below which an orthogonalized shift is dependent.
pub const PROBE_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    Cyclic,
    NonCyclic,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Evidence {
    RationalPseudocontinuation,
    BuiltinKnownCyclic,
    ResidualProbe,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclicityLabel {
    pub label: Label,
    pub evidence: Evidence,
    pub probe_data: Option<Vec<f64>>,
}

impl CyclicityLabel {
    pub fn cyclic(evidence: Evidence) -> Self {
        CyclicityLabel { label: Label::Cyclic, evidence, probe_data: None }
    }

    pub fn non_cyclic(evidence: Evidence) -> Self {
        CyclicityLabel { label: Label::NonCyclic, evidence, probe_data: None }
    }

    /// An undecided label carrying a residual curve as supporting data.
    pub fn unknown(probe_data: Option<Vec<f64>>) -> Self {
        let evidence = if probe_data.is_some() { Evidence::ResidualProbe } else { Evidence::None };
        CyclicityLabel { label: Label::Unknown, evidence, probe_data }
    }
}

/// Label a symbol by kind.
pub fn classify(symbol: &Symbol) -> CyclicityLabel {
    match symbol {
        Symbol::Rational(_) => CyclicityLabel::non_cyclic(Evidence::RationalPseudocontinuation),
        Symbol::Harmonic => CyclicityLabel::cyclic(Evidence::BuiltinKnownCyclic),
        // a finite coefficient list is a polynomial
        Symbol::Explicit(_) => CyclicityLabel::non_cyclic(Evidence::RationalPseudocontinuation),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RuleVerdict {
    Deterministic,
    NotDeterministic,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminismRuleVerdict {
    pub verdict: RuleVerdict,
    pub rule_fired: String,
}

impl DeterminismRuleVerdict {
    fn new(verdict: RuleVerdict, rule: &str) -> Self {
        DeterminismRuleVerdict { verdict, rule_fired: rule.to_string() }
    }
}

/// Backward determinism of the pair `(g ξ, h ξ)` from channel labels.
pub fn pair_rule(lg: &CyclicityLabel, lh: &CyclicityLabel) -> DeterminismRuleVerdict {
    use Label::*;
    match (lg.label, lh.label) {
        (Cyclic, NonCyclic) | (NonCyclic, Cyclic) => {
            DeterminismRuleVerdict::new(RuleVerdict::Deterministic, "cyclic and non-cyclic generator")
        }
        (NonCyclic, NonCyclic) => DeterminismRuleVerdict::new(
            RuleVerdict::NotDeterministic,
            "both non-cyclic: ratio is a quotient of inner functions",
        ),
        (Cyclic, Cyclic) => DeterminismRuleVerdict::new(
            RuleVerdict::Unknown,
            "both cyclic: undecided by labels, use the numerical sweep",
        ),
        _ => DeterminismRuleVerdict::new(RuleVerdict::Unknown, "unknown label: use the numerical sweep"),
    }
}

/// Family rule: channel 0 against each other channel.
pub fn multi_rule(labels: &[CyclicityLabel]) -> Result<DeterminismRuleVerdict> {
    let first = labels.first().ok_or(Error::EmptyLabels)?;
    if labels.len() == 1 {
        return Ok(match first.label {
            Label::Cyclic => DeterminismRuleVerdict::new(RuleVerdict::Deterministic, "single cyclic generator"),
            Label::NonCyclic => {
                DeterminismRuleVerdict::new(RuleVerdict::NotDeterministic, "single non-cyclic generator")
            }
            Label::Unknown => DeterminismRuleVerdict::new(RuleVerdict::Unknown, "unknown label: use the numerical sweep"),
        });
    }
    for (j, l) in labels.iter().enumerate().skip(1) {
        let v = pair_rule(first, l);
        if v.verdict == RuleVerdict::Deterministic {
            return Ok(DeterminismRuleVerdict::new(
                RuleVerdict::Deterministic,
                &format!("{} (channels 0 and {j})", v.rule_fired),
            ));
        }
    }
    if labels.iter().all(|l| l.label == Label::NonCyclic) {
        return Ok(DeterminismRuleVerdict::new(RuleVerdict::NotDeterministic, "all generators non-cyclic"));
    }
    Ok(DeterminismRuleVerdict::new(
        RuleVerdict::Unknown,
        "no deciding pair: use the numerical sweep",
    ))
}

/// `M[j][k] = 1/(j+k+1)`, zero-based.
pub fn hilbert_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("Hilbert matrix size must be at least 1".into()));
    }
    Ok(DMatrix::from_fn(n, n, |j, k| 1.0 / (j + k + 1) as f64))
}

/// Singular values of the `n x n` Hilbert matrix, descending.
pub fn hilbert_singular_values(n: usize) -> Result<Vec<f64>> {
    let m = hilbert_matrix(n)?;
    let mut s: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().map(|v| v.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Default probe truncation for `m` shifts and a target of length `len`.
pub fn default_probe_truncation(m: usize, len: usize) -> usize {
    4 * (m + len)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(v: &mut [Complex64], q: &[Complex64]) {
    let c = dot(q, v);
    for (x, y) in v.iter_mut().zip(q) {
        *x -= c * y;
    }
}

/// `r_j = dist(target, span{U*^k g : k <= j})` for `j = 0..=m`, all
/// vectors truncated to their first `truncation` coefficients.
pub fn residual_probe(g: &Symbol, target: &CoefficientWindow, m: usize, truncation: usize) -> Result<Vec<f64>> {
    let required = m + target.len();
    if truncation < required.max(1) {
        return Err(Error::TruncationTooShort { truncation, required });
    }
    let coeffs = g.coefficients(truncation + m);
    let mut residual: Vec<Complex64> = (0..truncation)
        .map(|i| target.values.get(i).copied().unwrap_or_default())
        .collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut curve = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let mut v = coeffs[k..k + truncation].to_vec();
        let scale = norm(&v);
        if scale > 0.0 {
            for _ in 0..2 {
                for q in &basis {
                    project_out(&mut v, q);
                }
            }
            let nv = norm(&v);
            if nv > PROBE_RANK_TOL * scale {
                v.iter_mut().for_each(|x| *x /= nv);
                project_out(&mut residual, &v);
                basis.push(v);
            }
        }
        curve.push(norm(&residual));
    }
    Ok(curve)
}
