//! Rectangular result tables and their CSV / JSON encodings.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Int(n) => Some(n as f64),
            Cell::Text(_) => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Cell::Int(n) => (*n).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Shortest decimal that round-trips, never exponent notation.
fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column. Missing or textual columns are config errors.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let k = self.column_index(name).ok_or_else(|| {
            CliError::Config(format!("svg: no column named {name:?} (available: {})", self.columns.join(", ")))
        })?;
        self.rows
            .iter()
            .map(|r| r[k].as_f64().ok_or_else(|| CliError::Config(format!("svg: column {name:?} is not numeric"))))
            .collect()
    }

    pub fn is_numeric(&self, k: usize) -> bool {
        self.rows.iter().all(|r| r[k].as_f64().is_some())
    }
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `{"columns": [...], "rows": [[...], ...]}` with non-finite numbers as null.
pub fn emit_json(table: &Table, path: &Path) -> Result<(), CliError> {
    let rows: Vec<serde_json::Value> =
        table.rows.iter().map(|r| serde_json::Value::Array(r.iter().map(Cell::json).collect())).collect();
    let doc = serde_json::json!({ "columns": table.columns, "rows": rows });
    let mut f = create(path)?;
    let text = serde_json::to_string_pretty(&doc).expect("table serializes");
    writeln!(f, "{text}").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
