//! Tabular results plus the JSON summary, written once at the end of a run.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// One CSV cell; `Empty` leaves the column blank.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Shortest round-trip representation in scientific notation.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

/// A thresholded metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    pub model: Option<String>,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metrics: BTreeMap<String, Value>,
    pub thresholds: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub error: Option<(String, String)>,
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn new(experiment: &str, model: Option<String>, seed: u64) -> Self {
        Report {
            experiment: experiment.into(),
            model,
            seed,
            columns: Vec::new(),
            rows: Vec::new(),
            metrics: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            checks: Vec::new(),
            error: None,
            wall_time: None,
        }
    }

    pub fn set_columns<S: AsRef<str>>(&mut self, columns: &[S]) {
        self.columns = columns.iter().map(|c| c.as_ref().to_string()).collect();
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn metric(&mut self, name: &str, value: impl Into<Value>) {
        self.metrics.insert(name.into(), value.into());
    }

    /// Records a metric with its threshold and whether it was met.
    pub fn check(&mut self, name: &str, value: impl Into<Value>, threshold: impl Into<Value>, passed: bool) {
        self.metrics.insert(name.into(), value.into());
        self.thresholds.insert(name.into(), threshold.into());
        self.checks.push(Check { name: name.into(), passed });
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> Value {
        let mut v = json!({
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "model": self.model,
            "seed": self.seed,
            "verdict": if self.passed() { "pass" } else { "fail" },
            "metrics": self.metrics,
            "thresholds": self.thresholds,
            "failed": self.failed_checks(),
            "rows": self.rows.len(),
            "error": self.error.as_ref().map(|(kind, message)| json!({"kind": kind, "message": message})),
        });
        if let Some(t) = self.wall_time {
            v["wall_time"] = json!(t);
        }
        v
    }

    fn csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
    }

    /// Writes `<dir>/<experiment>.csv` and `<dir>/<experiment>.summary.json`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
        let wrap = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Write { path, source }
        };
        fs::create_dir_all(dir).map_err(wrap(dir))?;
        let csv_path = dir.join(format!("{}.csv", self.experiment));
        let json_path = dir.join(format!("{}.summary.json", self.experiment));
        let csv = self.csv_bytes()?;
        let mut summary = serde_json::to_string_pretty(&self.summary()).expect("summary serializes");
        summary.push('\n');
        fs::write(&csv_path, csv).map_err(wrap(&csv_path))?;
        fs::write(&json_path, summary).map_err(wrap(&json_path))?;
        Ok((csv_path, json_path))
    }
}
