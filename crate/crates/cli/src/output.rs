use std::fmt;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};
use timearrow::{CMatrix, Error};

use crate::args::Format;

/// Failure classes mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Run metadata carried by every artifact.
#[derive(Debug, Clone)]
pub struct Meta {
    fields: Map<String, Value>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("tool".into(), json!("timearrow"));
        fields.insert("version".into(), json!(timearrow::VERSION));
        fields.insert("command".into(), json!(command));
        fields.insert("seed".into(), Value::Null);
        fields.insert("tolerances".into(), json!({}));
        Meta { fields }
    }

    pub fn set(mut self, key: &str, value: impl serde::Serialize) -> Self {
        self.fields.insert(key.into(), serde_json::to_value(value).expect("serializable metadata"));
        self
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        if let Some(Value::Object(t)) = self.fields.get_mut("tolerances") {
            t.insert(key.into(), json!(value));
        }
        self
    }

    pub fn value(&self) -> Value {
        Value::Object(self.fields.clone())
    }
}

/// Real matrices as nested rows, complex ones as `[re, im]` pairs.
pub fn matrix_json(m: &CMatrix) -> Value {
    let complex = m.iter().any(|c| c.im != 0.0);
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| {
                            let c = m[(i, j)];
                            if complex {
                                json!([c.re, c.im])
                            } else {
                                json!(c.re)
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Write the artifact. CSV output starts with a `# meta` comment line.
pub fn emit(out: Option<&Path>, format: Format, meta: &Meta, result: Value, csv: Option<String>) -> CliResult<()> {
    let text = match format {
        Format::Json => {
            let doc = json!({ "meta": meta.value(), "result": result });
            serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
        }
        Format::Csv => {
            let body = csv.ok_or_else(|| CliError::Config("this command has no CSV output".into()))?;
            format!("# meta {}\n{body}", serde_json::to_string(&meta.value()).expect("json values serialize"))
        }
    };
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
