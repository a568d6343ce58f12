//! Tabular output: CSV with `# key=value` header comments, or JSON.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::{CliError, Format};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Bool(bool),
    Missing,
}

impl Cell {
    fn to_csv(self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            Self::Real(v) => format_significant(v, 12),
            Self::Bool(v) => v.to_string(),
            Self::Missing => String::new(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Self::Int(v) => json!(v),
            Self::Real(v) => json!(v),
            Self::Bool(v) => json!(v),
            Self::Missing => Value::Null,
        }
    }

    pub fn as_real(self) -> Option<f64> {
        match self {
            Self::Real(v) => Some(v),
            Self::Int(v) => Some(v as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        for (key, value) in &self.meta {
            let v = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            writeln!(out, "# {key}={v}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_csv()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(|c| c.to_json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let meta: Map<String, Value> = self.meta.iter().cloned().collect();
        json!({ "meta": meta, "rows": rows })
    }
}

/// Writes `table` to `path`, or stdout when no path is given.
pub fn emit(table: &Table, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => table.write_csv(&mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &table.to_json())?;
            buf.push(b'\n');
        }
    }
    write_bytes(&buf, path)
}

pub(crate) fn write_bytes(buf: &[u8], path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, buf)?,
        None => std::io::stdout().lock().write_all(buf)?,
    }
    Ok(())
}

/// `%.{digits}g`-style formatting: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros removed.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
