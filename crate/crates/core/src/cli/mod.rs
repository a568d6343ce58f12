//! Command-line front end: closed-form sweeps, figure data and the
//! verification report.

pub mod config;
pub mod output;
pub mod sweep;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{Format, Machine, SweepArgs, SweepConfig};
pub use output::Table;
pub use sweep::{cmd_compute, cmd_figure, ComputeRow, Figure};
pub use verify::{cmd_verify, CheckResult, Fault};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "clone-qfim",
    version,
    about = "Quantum Fisher information of equatorial qudits through 1->2 cloning machines"
)]
pub struct Cli {
    /// Key-value file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One row per d: η, F_μμ, F_μν, QFIM eigenvalues, minimum total variance, attainability.
    Compute(SweepArgs),
    /// CSV/JSON data behind figure 1, 2 or 3.
    Figure(FigureArgs),
    /// Run every invariant check and emit a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// 1: input vs output diagonal and scaled bound; 2: UQCM vs PQCM diagonal;
    /// 3: total variances.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    pub which: u8,

    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,

    /// Deliberately break one ingredient to confirm the checks catch it.
    #[arg(long, value_enum)]
    pub inject_fault: Option<Fault>,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => config::read_config_file(path)?,
        None => Default::default(),
    };
    match cli.command {
        Command::Compute(args) => {
            let cfg = SweepConfig::for_compute(args.merged(&file)?)?;
            let rows = cmd_compute(&cfg)?;
            output::emit(
                &sweep::compute_table(&rows, &cfg),
                cfg.format,
                cfg.output_path.as_deref(),
            )?;
            Ok(EXIT_OK)
        }
        Command::Figure(args) => {
            let cfg = SweepConfig::for_figure(args.sweep.merged(&file)?)?;
            let figure =
                Figure::from_number(args.which).ok_or_else(|| usage("figure must be 1, 2 or 3"))?;
            let table = cmd_figure(figure, cfg.d_max)?;
            output::emit(&table, cfg.format, cfg.output_path.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let cfg = SweepConfig::for_verify(args.sweep.merged(&file)?)?;
            let report = cmd_verify(&cfg, args.inject_fault)?;
            verify::emit_report(&report, cfg.output_path.as_deref())?;
            let failed: Vec<&str> = report
                .iter()
                .filter(|c| !c.pass)
                .map(|c| c.name.as_str())
                .collect();
            if failed.is_empty() {
                eprintln!("verify: {} checks passed", report.len());
                Ok(EXIT_OK)
            } else {
                eprintln!(
                    "verify: {} of {} checks failed: {}",
                    failed.len(),
                    report.len(),
                    failed.join(", ")
                );
                Ok(EXIT_VERIFY_FAILED)
            }
        }
    }
}
