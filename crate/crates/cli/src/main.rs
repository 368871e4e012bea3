//! `monollr`: conditional distribution estimates, predictions, bandwidth
//! selection, bootstrap and simulation from the command line.

mod args;
mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use args::{DataArgs, EstimatorArgs, KernelArg, WindowArg};
use monollr::Method;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or input data.
    Usage(String),
    /// An estimator could not be evaluated.
    Estimator(monollr::Error),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Estimator(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<monollr::Error> for CliError {
    fn from(e: monollr::Error) -> Self {
        match e {
            monollr::Error::InvalidInput(msg) => CliError::Usage(msg),
            other => CliError::Estimator(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Estimator(e) => write!(f, "error[{}]: {e}", e.kind()),
            CliError::Io(msg) => write!(f, "error: {msg}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "monollr",
    version,
    about = "Monotone local linear conditional distribution estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the JSON echo of the run; defaults to `<out>.json`
    /// when --out is given.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional cdf (and density) on a response grid at one x.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        /// lc, llh, llm or ll-raw.
        #[arg(long)]
        method: Method,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Point predictions at given x values, or delete-one predictions of a
    /// range of rows.
    Predict {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        est: EstimatorArgs,
        /// lc, llh, llm or ll.
        #[arg(long)]
        method: Method,
        /// Comma-separated evaluation points.
        #[arg(long, allow_hyphen_values = true, required_unless_present = "holdout")]
        x: Option<String>,
        /// Rows FIRST:LAST (1-based, inclusive, after --sort) to predict
        /// from the remaining data one at a time.
        #[arg(long, conflicts_with = "x")]
        holdout: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Local leave-one-out cross-validation of the bandwidth at x.
    Cv {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long)]
        method: Method,
        /// Neighbourhood size; defaults to max(20, ceil(0.05 n)).
        #[arg(long)]
        m: Option<usize>,
        /// Comma-separated candidate bandwidths.
        #[arg(long, default_value = "10,20,30,40,50,60,70,80,90,100,110,120,130,140")]
        candidates: String,
        /// Candidates are observation counts or regressor units.
        #[arg(long, value_enum, default_value_t = UnitsArg::Counts)]
        units: UnitsArg,
        /// Fixed secondary bandwidth instead of the per-candidate rule.
        #[arg(long)]
        h0: Option<f64>,
        #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
        kernel: KernelArg,
        #[arg(long, value_enum, default_value_t = WindowArg::TwoSided)]
        window: WindowArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Limit model-free bootstrap of the llm cdf at (x, y).
    Bootstrap {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        /// Number of replicates.
        #[arg(long = "B", default_value_t = 500)]
        resamples: usize,
        /// Defaults to $MONOLLR_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a simulation experiment described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed; defaults to $MONOLLR_SEED, then the
        /// config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the command recorded in a JSON sidecar.
    Replay {
        sidecar: PathBuf,
        /// Write to this path instead of the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum UnitsArg {
    Counts,
    Regressor,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::dispatch(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
