//! `cdlaplace`: batch front end for transforms, verification suites, PDE
//! solves and fundamental solutions.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use cdlaplace::error::Error as LibError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        match e {
            LibError::InvalidArgument(_) | LibError::Dimension { .. } | LibError::LevelMismatch(..) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) | CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Cartesian,
    Spherical,
}

#[derive(Debug, Parser)]
#[command(name = "cdlaplace", version, about = "Multiparameter Laplace transforms over Cayley-Dickson algebras")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write an SVG plot.
    #[arg(long, global = true)]
    pub svg: bool,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Quadrature target tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Forward transform of a named original on a p-grid.
    Transform,
    /// Run verification suites; `all` runs every suite.
    Verify {
        /// Suite ids; taken from the config when omitted.
        ids: Vec<String>,
    },
    /// Particular solution of a constant-coefficient PDE.
    Solve,
    /// Radial profile of the Laplacian's fundamental solution.
    Fundsol,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cdlaplace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
