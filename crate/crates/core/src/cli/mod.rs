//! Command-line front end.
//!
//! Every run writes its files into the `--out` directory. Text and CSV files start with a
//! `#` comment block holding the format tag and the full configuration as one JSON line;
//! JSON files carry the same two items as their first fields.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;

pub use output::FORMAT_TAG;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "splineproj",
    version,
    about = "Orthogonal projections onto spline spaces and their stability experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Gram matrix and its inverse.
    Gram {
        #[command(flatten)]
        common: Common,
    },
    /// Geometric decay fit of the inverse Gram matrix.
    Decay {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = WeightingArg::Hull)]
        weighting: WeightingArg,
    },
    /// Lebesgue function and constant of the projector.
    Lebesgue {
        #[command(flatten)]
        common: Common,
    },
    /// Projection of a test function, sampled for plotting.
    Project {
        #[command(flatten)]
        common: Common,
        /// Test function: sin, hat, step, step:J, power13, power12, power:C:A.
        #[arg(long = "fn", default_value = "sin")]
        function: String,
    },
    /// Decay of the periodic projection of a function supported in one cell.
    #[command(name = "lemma2")]
    #[serde(rename = "lemma2")]
    SingleCell {
        #[command(flatten)]
        common: Common,
        /// Index of the supporting cell.
        #[arg(long, default_value_t = 0)]
        cell: usize,
        /// Profile on the cell: indicator, or random piecewise constant.
        #[arg(long, value_enum, default_value_t = CellFnArg::Indicator)]
        profile: CellFnArg,
    },
    /// Errors of periodic projections under refinement.
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long = "fn", default_value = "sin")]
        function: String,
        /// Numbers of knots, strictly increasing.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
        ns: Vec<usize>,
        /// Points at which the error is tracked.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.9")]
        tracked: Vec<f64>,
        #[arg(long, value_enum, default_value_t = LawArg::Uniform)]
        law: LawArg,
    },
    /// Lebesgue constants over orders, dimensions and random knot trials.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Orders to sweep; defaults to the value of -k.
        #[arg(long, value_delimiter = ',')]
        orders: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        ns: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = LawArg::Random)]
        law: LawArg,
        /// Also measure clamped projectors.
        #[arg(long)]
        with_clamped: bool,
    },
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Spline order.
    #[arg(short = 'k', long = "order")]
    pub k: Option<usize>,
    /// Knot file (`k <order> <clamped|periodic>` header, one knot per line).
    #[arg(long, conflicts_with_all = ["uniform", "random"])]
    pub knots: Option<PathBuf>,
    /// Uniform knots: N cells on [0, 1] (clamped) or N knots on the torus.
    #[arg(long, value_name = "N", conflicts_with = "random")]
    pub uniform: Option<usize>,
    /// Random knots with N cells, drawn from --seed and --min-ratio.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smallest cell relative to 1/N for random knots.
    #[arg(long, default_value_t = 1e-2)]
    pub min_ratio: f64,
    #[arg(long, conflicts_with = "clamped")]
    pub periodic: bool,
    #[arg(long)]
    pub clamped: bool,
    /// Subdivisions of each knot interval for moment quadrature.
    #[arg(long, default_value_t = 4)]
    pub quad_depth: usize,
    /// Sample points per knot interval (or total grid size for converge).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "splineproj-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightingArg {
    Hull,
    Maxsupp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFnArg {
    Indicator,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawArg {
    Uniform,
    Random,
}

/// Failure of a CLI run, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Math(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Math(e) if e.is_numerical() => exit::NUMERICAL,
            _ => exit::CONFIG,
        }
    }
}

/// Runs a parsed command, returning the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    commands::dispatch(cli)
}

/// Parses `args`, runs, reports on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            exit::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
