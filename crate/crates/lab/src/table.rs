//! Tabular output as CSV or JSON lines.
//!
//! CSV writes reals with 17 significant digits in scientific notation so that
//! every value round-trips; list cells are joined with `;`. JSON lines keep
//! lists as arrays and write reals in their shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }

    pub fn as_str(self) -> &'static str {
        self.extension()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i128),
    Text(String),
    Bool(bool),
    Reals(Vec<f64>),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl From<Vec<f64>> for Cell {
    fn from(v: Vec<f64>) -> Self {
        Cell::Reals(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Real(v) => fmt_real(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Reals(vs) => vs.iter().map(|&v| fmt_real(v)).collect::<Vec<_>>().join(";"),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        let real = |v: f64| serde_json::Number::from_f64(v).map_or_else(|| Value::String(fmt_real(v)), Value::Number);
        match self {
            Cell::Real(v) => real(*v),
            Cell::Int(v) => i64::try_from(*v)
                .map(Value::from)
                .or_else(|_| u64::try_from(*v).map(Value::from))
                .unwrap_or_else(|_| Value::String(v.to_string())),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Reals(vs) => Value::Array(vs.iter().map(|&v| real(v)).collect()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in &self.rows {
            let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
            serde_json::to_writer(&mut out, &obj)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf).expect("writing to memory"),
            Format::Jsonl => self.write_jsonl(&mut buf).expect("writing to memory"),
        }
        String::from_utf8(buf).expect("tables are UTF-8")
    }

    /// Writes `<stem>.<ext>` under `dir` and returns the path.
    pub fn save(&self, dir: &Path, stem: &str, format: Format) -> LabResult<std::path::PathBuf> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        let err = |source| LabError::Write {
            path: path.clone(),
            source,
        };
        let file = File::create(&path).map_err(err)?;
        let out = BufWriter::new(file);
        match format {
            Format::Csv => self.write_csv(out).map_err(|e| err(e.into()))?,
            Format::Jsonl => self.write_jsonl(out).map_err(err)?,
        }
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["value", "prob", "tag", "p", "ok", "missing"]);
        t.push(vec![0.1.into(), 1.0.into(), "x".into(), vec![0.25, 0.75].into(), true.into(), Cell::Empty]);
        t
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let s = sample().to_string(Format::Csv);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("value,prob,tag,p,ok,missing"));
        assert_eq!(
            lines.next(),
            Some("1.0000000000000001e-1,1.0000000000000000e0,x,2.5000000000000000e-1;7.5000000000000000e-1,true,")
        );
        let back: f64 = fmt_real(0.1).parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn jsonl_keeps_arrays() {
        let s = sample().to_string(Format::Jsonl);
        let v: Value = serde_json::from_str(s.trim()).unwrap();
        assert_eq!(v["p"], serde_json::json!([0.25, 0.75]));
        assert_eq!(v["missing"], Value::Null);
        assert_eq!(v["value"], serde_json::json!(0.1));
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["value", "prob", "tag", "p", "ok", "missing"]);
        let mut big = Table::new(&["seed"]);
        big.push(vec![u64::MAX.into()]);
        assert_eq!(big.to_string(Format::Jsonl).trim(), format!("{{\"seed\":{}}}", u64::MAX));
    }
}
