//! Batch front end for capability analysis: ingest measurements and
//! configuration, run univariate or multivariate analyses, and emit
//! machine- or human-readable reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O or data error,
//! 4 domain/numeric failure inside the analysis.

mod config;
mod data;
mod output;
mod run;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

/// Everything that can go wrong, sorted by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or flag combination (exit 2).
    Config(String),
    /// Unreadable or unwritable file (exit 3).
    Io(String),
    /// Malformed data file (exit 3).
    Data(String),
    /// Domain or numeric failure propagated from the analysis (exit 4).
    Analysis(capq_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Data(_) => 3,
            CliError::Analysis(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(msg) | CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Analysis(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "capq",
    version,
    about = "Process-capability analysis on measurement data",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute univariate capability indices from a config and optional data file
    Analyze(AnalyzeArgs),
    /// Screen models on transformed multivariate data and compute its indices
    MvAnalyze(MvAnalyzeArgs),
    /// Fit candidate distribution families to a one-column data file
    Fit(FitArgs),
    /// Check a configured model's yield by seeded Monte Carlo
    Oracle(OracleArgs),
    /// List every supported capability index with its parameters
    ListIndices(ListIndicesArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Analysis configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Single-column CSV of measurements (header row required)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Override every seed in the configuration
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MvAnalyzeArgs {
    /// Analysis configuration with a multivariate block (JSON)
    #[arg(long)]
    config: PathBuf,
    /// CSV of measurements, one column per axis (header row required)
    #[arg(long)]
    data: PathBuf,
    /// Override every seed in the configuration
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Single-column CSV of measurements (header row required)
    #[arg(long)]
    data: PathBuf,
    /// Candidate families, comma separated (default: every continuous family)
    #[arg(long, value_delimiter = ',')]
    families: Option<Vec<String>>,
    /// Number of trials when fitting the binomial family
    #[arg(long)]
    trials: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    /// Configuration with a spec block and a fully specified model (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the configured Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ListIndicesArgs {
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => run::analyze(
            &a.config,
            a.data.as_deref(),
            a.seed,
            a.output.format,
            a.output.out.as_deref(),
        ),
        Command::MvAnalyze(a) => {
            run::mv_analyze(&a.config, &a.data, a.seed, a.output.format, a.output.out.as_deref())
        }
        Command::Fit(a) => run::fit(
            &a.data,
            a.families.as_deref(),
            a.trials,
            a.output.format,
            a.output.out.as_deref(),
        ),
        Command::Oracle(a) => {
            run::oracle(&a.config, a.seed, a.output.format, a.output.out.as_deref())
        }
        Command::ListIndices(a) => run::list_indices(a.output.format, a.output.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
