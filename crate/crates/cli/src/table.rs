//! Result tables and their CSV + JSON sidecar output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    /// NaN or infinite entries are allowed only in flagged columns.
    pub may_diverge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    /// Floats use 17 significant digits in scientific notation.
    pub fn render(&self) -> String {
        match self {
            Cell::Number(v) if v.is_nan() => "NaN".into(),
            Cell::Number(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Number(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalars and derived quantities stored in the sidecar.
    pub notes: Map<String, Value>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn column(mut self, name: &str, unit: &str) -> Self {
        self.columns.push(Column { name: name.into(), unit: unit.into(), may_diverge: false });
        self
    }

    pub fn diverging_column(mut self, name: &str, unit: &str) -> Self {
        self.columns.push(Column { name: name.into(), unit: unit.into(), may_diverge: true });
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.notes.insert(key.into(), value.into());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(CliError::Io {
                    path: "<table>".into(),
                    message: format!("row {r} has {} cells for {} columns", row.len(), self.columns.len()),
                });
            }
            for (cell, col) in row.iter().zip(&self.columns) {
                if let Cell::Number(v) = cell {
                    if !v.is_finite() && !col.may_diverge {
                        return Err(CliError::Io {
                            path: "<table>".into(),
                            message: format!("non-finite value in column `{}` (row {r})", col.name),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        self.validate()?;
        let io = |e: csv::Error| CliError::Io { path: "<csv>".into(), message: e.to_string() };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })
    }
}

/// Provenance written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: String,
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Value,
    pub columns: Vec<Column>,
    pub rows: usize,
    pub notes: Map<String, Value>,
    pub output_sha256: String,
}

pub const SIDECAR_SCHEMA: &str = "dipolar-spin-sim/result/1";

pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn sidecar(table: &ResultTable, config: &ExperimentConfig, csv: &[u8]) -> Sidecar {
    Sidecar {
        schema: SIDECAR_SCHEMA.into(),
        kind: config.kind.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        config_hash: config.hash(),
        config: config.canonical(),
        columns: table.columns.clone(),
        rows: table.rows.len(),
        notes: table.notes.clone(),
        output_sha256: hex::encode(Sha256::digest(csv)),
    }
}

/// Writes `out` and its sidecar; returns the sidecar.
pub fn write(table: &ResultTable, config: &ExperimentConfig, out: &Path) -> Result<Sidecar, CliError> {
    let csv = table.to_csv()?;
    let meta = sidecar(table, config, &csv);
    let io = |p: &Path, e: std::io::Error| CliError::Io { path: p.display().to_string(), message: e.to_string() };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    std::fs::write(out, &csv).map_err(|e| io(out, e))?;
    let side = sidecar_path(out);
    let mut text = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    text.push('\n');
    std::fs::write(&side, text).map_err(|e| io(&side, e))?;
    Ok(meta)
}
