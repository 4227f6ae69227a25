//! Ready-made rank-one process models.

use serde::{Deserialize, Serialize};

use crate::symbols::{Symbol, SymbolRecord};
use crate::{Error, Result};

/// A rank-one process `xi_k = sum_l G_l w_k-l` where channel `i` of `G_l`
/// is coefficient `l` of `channels[i]` and `w` is unit-variance white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    pub name: String,
    pub channels: Vec<Symbol>,
    pub noise_variance: f64,
}

impl ProcessModel {
    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn is_real(&self) -> bool {
        self.channels.iter().all(Symbol::is_real)
    }

    /// Truncation used by routines that need one and were not given one.
    pub fn truncation_default(&self) -> usize {
        self.channels
            .iter()
            .map(Symbol::truncation_default)
            .max()
            .unwrap_or(1)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelRecord::from(self)).expect("model records always serialize")
    }

    pub fn from_json(s: &str) -> Result<ProcessModel> {
        let rec: ModelRecord = serde_json::from_str(s)?;
        ProcessModel::try_from(rec)
    }
}

/// JSON form: `{"name": "...", "channels": [SymbolRecord, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub name: String,
    pub channels: Vec<SymbolRecord>,
}

impl From<&ProcessModel> for ModelRecord {
    fn from(m: &ProcessModel) -> Self {
        ModelRecord {
            name: m.name.clone(),
            channels: m.channels.iter().map(SymbolRecord::from).collect(),
        }
    }
}

impl TryFrom<ModelRecord> for ProcessModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<ProcessModel> {
        let channels = r
            .channels
            .into_iter()
            .map(Symbol::try_from)
            .collect::<Result<Vec<_>>>()?;
        custom(&r.name, channels)
    }
}

/// `x_k = w_k + alpha w_{k-1}`, `y_k = w_k`.
pub fn ma_example(alpha: f64) -> Result<ProcessModel> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::ZeroAlpha);
    }
    Ok(ProcessModel {
        name: format!("ma-{alpha}"),
        channels: vec![Symbol::polynomial(&[1.0, alpha])?, Symbol::constant(1.0)?],
        noise_variance: 1.0,
    })
}

/// `x_k = sum_l w_{k-l}/(1+l)`, `y_k = w_k`: regular forward, deterministic
/// backward.
pub fn harmonic_example() -> ProcessModel {
    ProcessModel {
        name: "harmonic".into(),
        channels: vec![Symbol::Harmonic, Symbol::constant(1.0).expect("constant symbol")],
        noise_variance: 1.0,
    }
}

/// Wrap arbitrary channel symbols into a model driven by one scalar noise.
pub fn custom(name: &str, channels: Vec<Symbol>) -> Result<ProcessModel> {
    if channels.is_empty() {
        return Err(Error::EmptyChannels);
    }
    Ok(ProcessModel {
        name: name.to_string(),
        channels,
        noise_variance: 1.0,
    })
}

/// Names accepted by [`named`].
pub const NAMES: &[&str] = &["ma-2", "ma-0.5", "harmonic", "harmonic-delay", "scalar-ma", "white"];

/// One-line descriptions, parallel to [`NAMES`].
pub const DESCRIPTIONS: &[&str] = &[
    "x = (1+2z) w, y = w",
    "x = (1+0.5z) w, y = w",
    "x = harmonic series filter, y = w",
    "x = harmonic series filter, y = (1+z) w",
    "scalar x = (1+0.5z) w",
    "scalar white noise",
];

/// Look up a catalog model. `ma` (with an alpha) is also accepted.
pub fn named(name: &str, alpha: Option<f64>) -> Result<ProcessModel> {
    let mut m = match name {
        "ma" => ma_example(alpha.unwrap_or(2.0))?,
        "ma-2" => ma_example(2.0)?,
        "ma-0.5" => ma_example(0.5)?,
        "harmonic" => harmonic_example(),
        "harmonic-delay" => custom(
            "harmonic-delay",
            vec![Symbol::Harmonic, Symbol::polynomial(&[1.0, 1.0])?],
        )?,
        "scalar-ma" => custom("scalar-ma", vec![Symbol::polynomial(&[1.0, 0.5])?])?,
        "white" => custom("white", vec![Symbol::constant(1.0)?])?,
        other => return Err(Error::UnknownModel(other.to_string())),
    };
    if name != "ma" {
        m.name = name.to_string();
    }
    Ok(m)
}

/// Every fixed catalog entry.
pub fn all() -> Vec<ProcessModel> {
    NAMES
        .iter()
        .map(|n| named(n, None).expect("catalog entries are valid"))
        .collect()
}
