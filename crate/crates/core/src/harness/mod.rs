//! Configuration-driven experiments: the `verify` suite, table runs and
//! their on-disk reports.

pub mod checks;
pub mod config;
pub mod report;
pub mod tables;

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use checks::{find, growth, run_check, CheckOutput, CheckSpec, CHECKS};
pub use config::{Domain, ExperimentConfig};
pub use report::{Assertion, Cell, CheckRecord, Outcome, RunReport, Table, Timing, Value};
pub use tables::TableRun;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Convergence,
    KernelProfile,
    Modulus,
    Kfunc,
    Approx,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Verify,
        Command::Convergence,
        Command::KernelProfile,
        Command::Modulus,
        Command::Kfunc,
        Command::Approx,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Convergence => "convergence",
            Command::KernelProfile => "kernel-profile",
            Command::Modulus => "modulus",
            Command::Kfunc => "kfunc",
            Command::Approx => "approx",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Usage(format!("unknown command {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Usage(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

/// A finished run: the report and the tables written next to it.
pub struct RunOutput {
    pub report: RunReport,
    pub tables: Vec<Table>,
}

/// Runs the selected checks; an empty `config.checks` selects all of them.
pub fn run_verify(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let specs: Vec<&CheckSpec> = if config.checks.is_empty() {
        CHECKS.iter().collect()
    } else {
        config.checks.iter().map(|n| find(n).expect("validated")).collect()
    };
    let start = Instant::now();
    let results: Vec<(CheckRecord, f64)> = specs.par_iter().map(|s| run_check(s, config)).collect();
    let mut timing = Timing { total_seconds: start.elapsed().as_secs_f64(), checks: BTreeMap::new() };
    let mut records = Vec::with_capacity(results.len());
    for (rec, secs) in results {
        timing.checks.insert(rec.name.clone(), secs);
        records.push(rec);
    }
    Ok(RunReport::new(Command::Verify.name(), config, records, timing))
}

/// Runs `command`. Usage errors are returned; numerical failures inside a
/// run are recorded in the report.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    if command == Command::Verify {
        let report = run_verify(config)?;
        let tables = report.records.iter().map(record_table).collect();
        return Ok(RunOutput { report, tables });
    }
    let start = Instant::now();
    let result = match command {
        Command::Convergence => tables::run_convergence(config),
        Command::KernelProfile => tables::run_kernel_profile(config),
        Command::Modulus => tables::run_modulus(config),
        Command::Kfunc => tables::run_kfunc(config),
        Command::Approx => tables::run_approx(config),
        Command::Verify => unreachable!(),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (tables, records) = match result {
        Ok(TableRun { tables, records }) => (tables, records),
        Err(e @ Error::Usage(_)) => return Err(e),
        Err(e) => (
            Vec::new(),
            vec![CheckRecord {
                name: command.name().into(),
                anchor: "plumbing".into(),
                values: BTreeMap::new(),
                fitted_constants: BTreeMap::new(),
                assertions: Vec::new(),
                pass: false,
                error: Some(e.to_string()),
            }],
        ),
    };
    let timing = Timing { total_seconds: elapsed, checks: BTreeMap::from([(command.name().to_string(), elapsed)]) };
    Ok(RunOutput { report: RunReport::new(command.name(), config, records, timing), tables })
}

/// A check record flattened to `(quantity, index, value)` rows.
pub fn record_table(rec: &CheckRecord) -> Table {
    let mut t = Table::new(&rec.name, &["quantity", "index", "value"]);
    for (k, v) in &rec.values {
        match v {
            Value::Scalar(x) => t.push(vec![k.as_str().into(), 0usize.into(), (*x).into()]),
            Value::Series(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    t.push(vec![k.as_str().into(), i.into(), (*x).into()]);
                }
            }
        }
    }
    for (k, v) in &rec.fitted_constants {
        t.push(vec![format!("fitted.{k}").as_str().into(), 0usize.into(), (*v).into()]);
    }
    for a in &rec.assertions {
        t.push(vec![format!("assertion.{}.measure", a.label).as_str().into(), 0usize.into(), a.measure.into()]);
        t.push(vec![format!("assertion.{}.tolerance", a.label).as_str().into(), 0usize.into(), a.tolerance.into()]);
    }
    t
}

/// Writes `report.json` and one file per table into `dir`.
pub fn write_outputs(dir: &Path, output: &RunOutput, format: Format) -> Result<()> {
    let io = |e: std::io::Error| Error::Usage(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("report.json"), output.report.to_json()).map_err(io)?;
    for t in &output.tables {
        match format {
            Format::Csv => std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv()?).map_err(io)?,
            Format::Json => {
                let text = serde_json::to_string_pretty(t).expect("tables serialize") + "\n";
                std::fs::write(dir.join(format!("{}.json", t.name)), text).map_err(io)?
            }
        }
    }
    Ok(())
}
