//! Tabular report rendering: one in-memory shape, two on-disk forms.
//!
//! Reports are pure values. CSV and JSON renderings carry identical values:
//! numbers are rounded to 3 decimals once, here, and both forms render the
//! rounded value. Unavailable cells are `--` in CSV and `null` in JSON.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Text(String),
    Int(i64),
    /// Rendered at 3 decimal places.
    Num(f64),
    /// Unavailable (undefined α, no qualifying pairs, ...).
    Missing,
}

impl From<&str> for CellValue {
    fn from(s: &str) -> Self {
        CellValue::Text(s.to_string())
    }
}

impl From<String> for CellValue {
    fn from(s: String) -> Self {
        CellValue::Text(s)
    }
}

impl From<i64> for CellValue {
    fn from(v: i64) -> Self {
        CellValue::Int(v)
    }
}

impl From<usize> for CellValue {
    fn from(v: usize) -> Self {
        CellValue::Int(v as i64)
    }
}

impl From<f64> for CellValue {
    fn from(v: f64) -> Self {
        CellValue::Num(v)
    }
}

impl From<Option<f64>> for CellValue {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(x) => CellValue::Num(x),
            None => CellValue::Missing,
        }
    }
}

/// Round to 3 decimals and normalize negative zero.
fn round3(x: f64) -> f64 {
    let r = (x * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// A titled table with named columns and provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
    /// Free-form notes recorded alongside the data (analysis decisions,
    /// filter settings) so consumers see how the numbers were produced.
    pub metadata: BTreeMap<String, String>,
}

impl ReportTable {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> ReportTable {
        ReportTable {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<CellValue>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match column count in {}",
            self.title
        );
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.insert(key.to_string(), value.into());
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    CellValue::Text(s) => s.clone(),
                    CellValue::Int(v) => v.to_string(),
                    CellValue::Num(v) => format!("{:.3}", round3(*v)),
                    CellValue::Missing => "--".to_string(),
                })
                .collect();
            writer.write_record(&fields).expect("in-memory csv");
        }
        String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut object = serde_json::Map::new();
                for (column, cell) in self.columns.iter().zip(row) {
                    let value = match cell {
                        CellValue::Text(s) => json!(s),
                        CellValue::Int(v) => json!(v),
                        CellValue::Num(v) => json!(round3(*v)),
                        CellValue::Missing => Value::Null,
                    };
                    object.insert(column.clone(), value);
                }
                Value::Object(object)
            })
            .collect();
        json!({
            "title": self.title,
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": rows,
        })
    }

    /// Write `<basename>.csv` and `<basename>.json` under `dir`.
    pub fn write(&self, dir: &Path, basename: &str) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{basename}.csv"));
        let json_path = dir.join(format!("{basename}.json"));
        File::create(&csv_path)
            .and_then(|mut f| f.write_all(self.to_csv().as_bytes()))
            .map_err(|e| Error::io(&csv_path, e))?;
        let text = serde_json::to_string_pretty(&self.to_json()).expect("report is valid json");
        File::create(&json_path)
            .and_then(|mut f| writeln!(f, "{text}"))
            .map_err(|e| Error::io(&json_path, e))?;
        Ok((csv_path, json_path))
    }
}
