//! The `qgeo` command-line harness.
//!
//! ```text
//! qgeo verify-intelligent [--kind orthogonal|nonorthogonal|both] ...
//! qgeo random-sweep [--trials N] [--dim N] [--dim-max N] [--ensemble gaussian|split] ...
//! qgeo trace-path [--kind orthogonal|nonorthogonal|stationary] ...
//! ```
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! and configuration errors.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

pub use commands::{random_sweep, trace_path, verify_intelligent, GEODESIC_TOLERANCE, SWEEP_TOLERANCE};
pub use config::{CommandName, Ensemble, Format, Kind, Method, RunArgs, RunConfig};
pub use report::{Check, FamilyResult, Report, Summary, SweepResult, TraceRow, TrialResult, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "qgeo",
    version,
    about = "Fubini-Study geometry and uncertainty-relation checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run both intelligent-state families through the geodesic and saturation checks
    VerifyIntelligent(RunArgs),
    /// Check S ≥ S₀ over seeded random generators and states
    RandomSweep(RunArgs),
    /// Emit ΔA, fidelity and cumulative length along one path
    TracePath(RunArgs),
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::VerifyIntelligent(_) => CommandName::VerifyIntelligent,
            Command::RandomSweep(_) => CommandName::RandomSweep,
            Command::TracePath(_) => CommandName::TracePath,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::VerifyIntelligent(a) | Command::RandomSweep(a) | Command::TracePath(a) => a,
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let config = RunConfig::resolve(cli.command.name(), cli.command.args())?;
    let report = match config.command {
        CommandName::VerifyIntelligent => verify_intelligent(&config)?,
        CommandName::RandomSweep => random_sweep(&config)?,
        CommandName::TracePath => trace_path(&config)?,
    };
    Ok(report)
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let args = cli.command.args();
    let text = report.render(args.format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: {e}");
        return 2;
    }
    report.exit_code()
}
