//! Result tables and their CSV / JSON encodings.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::ScenarioSpec;
use crate::error::{CliError, Result};

pub const BUILD: &str = concat!("hdfd-cli ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(u64),
    Float(f64),
    Text(String),
    /// Unavailable, e.g. a bound for a saturated rate vector.
    Na,
}

impl Value {
    pub fn opt(x: Option<f64>) -> Value {
        x.map_or(Value::Na, Value::Float)
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text(s.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(v) => Some(v as f64),
            Value::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    fn csv_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) if v.is_finite() => v.to_string(),
            Value::Float(_) | Value::Na => "NA".to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Int(v) => json!(v),
            Value::Float(v) if v.is_finite() => json!(v),
            Value::Float(_) | Value::Na => serde_json::Value::Null,
            Value::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Cell of `row` under column `name`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Value> {
        self.column(name).map(|c| &self.rows[row][c])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let enc = |e: csv::Error| CliError::Encode(e.to_string());
    w.write_record(&table.columns).map_err(enc)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Value::csv_field))
            .map_err(enc)?;
    }
    w.flush().map_err(|e| CliError::Encode(e.to_string()))
}

#[derive(Serialize)]
struct Metadata {
    seed_derivation: &'static str,
    dl_tie_break: &'static str,
    emax_tie_break: &'static str,
}

/// JSON summary: build id, the resolved config, reproduction metadata and
/// the table itself.
pub fn summary_json(spec: &ScenarioSpec, table: &Table) -> serde_json::Value {
    json!({
        "build": BUILD,
        "config": spec,
        "metadata": Metadata {
            seed_derivation: "replication r uses splitmix64(seed ^ splitmix64(r)) to seed ChaCha8",
            dl_tie_break: "lowest user index among longest downlinks",
            emax_tie_break: "uplink when uplink and downlink rates are equal",
        },
        "columns": table.columns,
        "rows": table.rows.iter().map(|r| r.iter().map(Value::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

pub fn render(spec: &ScenarioSpec, table: &Table, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(table, &mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &summary_json(spec, table))
                .map_err(|e| CliError::Encode(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

/// Writes the rendered table to `path`, or to stdout when `path` is `None`.
pub fn emit(spec: &ScenarioSpec, table: &Table, format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = render(spec, table, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|source| CliError::Write {
                path: "<stdout>".into(),
                source,
            }),
    }
}
