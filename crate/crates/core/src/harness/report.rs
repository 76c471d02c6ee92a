use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// A recorded quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Scalar(f64),
    Series(Vec<f64>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Scalar(v)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Series(v)
    }
}

/// `measure <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub label: String,
    pub measure: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn new(label: impl Into<String>, measure: f64, tolerance: f64) -> Self {
        Self { label: label.into(), measure, tolerance, pass: measure <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The property under test, or `"plumbing"`.
    pub anchor: String,
    pub values: BTreeMap<String, Value>,
    pub fitted_constants: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
    /// Set when the check could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

/// Wall-clock seconds; excluded from determinism comparisons.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub checks: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub records: Vec<CheckRecord>,
    pub pass: bool,
    pub environment: Environment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

/// How a run ended, in exit-code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailure,
    NumericalFailure,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig, records: Vec<CheckRecord>, timing: Timing) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Self {
            command: command.into(),
            config: config.clone(),
            records,
            pass,
            environment: Environment::current(),
            timing: Some(timing),
        }
    }

    pub fn outcome(&self) -> Outcome {
        if self.records.iter().any(|r| r.error.is_some()) {
            Outcome::NumericalFailure
        } else if self.pass {
            Outcome::Pass
        } else {
            Outcome::CheckFailure
        }
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    /// The report with timing removed.
    pub fn canonical_json(&self) -> String {
        Self { timing: None, ..self.clone() }.to_json()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(field: &str) -> Cell {
        if let Ok(v) = field.parse::<i64>() {
            return Cell::Int(v);
        }
        if let Ok(v) = field.parse::<f64>() {
            return Cell::Float(v);
        }
        Cell::Text(field.to_string())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    /// RFC 4180 with `\n` line endings and a header row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Configuration(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Configuration(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Configuration(format!("csv: {e}")))
    }

    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let bad = |e: csv::Error| Error::Usage(format!("csv {name}: {e}"));
        let columns = r.headers().map_err(bad)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(bad)?.iter().map(Cell::parse).collect());
        }
        Ok(Self { name: name.into(), columns, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", &["n", "value", "label"]);
        t.push(vec![4usize.into(), 0.1.into(), "plain".into()]);
        t.push(vec![8usize.into(), (-1.0 / 3.0).into(), "needs, \"quotes\"".into()]);
        t.push(vec![16usize.into(), f64::INFINITY.into(), "".into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let text = sample().to_csv().unwrap();
        assert!(text.starts_with("n,value,label\n4,1.0000000000000001e-1,plain\n"), "{text}");
        assert!(text.contains("\"needs, \"\"quotes\"\"\""));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        assert_eq!(Table::from_csv("demo", &t.to_csv().unwrap()).unwrap(), t);
    }

    proptest! {
        #[test]
        fn floats_survive_csv(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            let mut t = Table::new("p", &["x"]);
            t.push(vec![v.into()]);
            let back = Table::from_csv("p", &t.to_csv().unwrap()).unwrap();
            prop_assert_eq!(back.rows[0][0].as_f64().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn canonical_json_drops_timing() {
        let rec = CheckRecord {
            name: "x".into(),
            anchor: "plumbing".into(),
            values: BTreeMap::new(),
            fitted_constants: BTreeMap::new(),
            assertions: vec![Assertion::new("a", 1.0, 0.5)],
            pass: false,
            error: None,
        };
        let a = RunReport::new("verify", &ExperimentConfig::default(), vec![rec.clone()], Timing::default());
        let mut b = a.clone();
        b.timing = Some(Timing { total_seconds: 3.0, checks: BTreeMap::new() });
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.canonical_json(), b.canonical_json());
        assert_eq!(a.outcome(), Outcome::CheckFailure);
        let back: RunReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);

        let broken = CheckRecord { error: Some("no convergence".into()), ..rec.clone() };
        let c = RunReport::new("verify", &ExperimentConfig::default(), vec![rec, broken], Timing::default());
        assert_eq!(c.outcome(), Outcome::NumericalFailure);
    }
}
