use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use conic_approx::harness::{self, Command, ExperimentConfig, Format, Outcome};
use conic_approx::Error;

#[derive(Parser)]
#[command(name = "conic-approx", version, about = "Approximation experiments on conic surfaces and solid cones")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the verification suite
    Verify(RunArgs),
    /// Best approximation against the modulus
    Convergence(RunArgs),
    /// Kernel decay profiles
    KernelProfile(RunArgs),
    /// Moduli of smoothness
    Modulus(RunArgs),
    /// Modulus against K-functional
    Kfunc(RunArgs),
    /// Near-best operator error against best approximation
    Approx(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli) {
        Ok(outcome) => ExitCode::from(match outcome {
            Outcome::Pass => 0,
            Outcome::CheckFailure => EXIT_CHECK,
            Outcome::NumericalFailure => EXIT_NUMERICAL,
        }),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(e.downcast_ref::<Error>(), Some(Error::Usage(_)));
            ExitCode::from(if usage { EXIT_USAGE } else { EXIT_NUMERICAL })
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<Outcome> {
    let (command, args) = match cli.command {
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Convergence(a) => (Command::Convergence, a),
        Cmd::KernelProfile(a) => (Command::KernelProfile, a),
        Cmd::Modulus(a) => (Command::Modulus, a),
        Cmd::Kfunc(a) => (Command::Kfunc, a),
        Cmd::Approx(a) => (Command::Approx, a),
    };
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let output = harness::run(command, &config)?;
    harness::write_outputs(&args.out, &output, format)
        .with_context(|| format!("writing results for {}", command.name()))?;
    for rec in &output.report.records {
        let status = match (&rec.error, rec.pass) {
            (Some(_), _) => "ERROR",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        println!("{status:5} {}", rec.name);
        if let Some(e) = &rec.error {
            println!("      {e}");
        }
        for a in rec.assertions.iter().filter(|a| !a.pass) {
            println!("      {}: {:e} > {:e}", a.label, a.measure, a.tolerance);
        }
    }
    Ok(output.report.outcome())
}
