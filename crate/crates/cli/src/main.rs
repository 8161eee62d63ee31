//! `aperture`: command-line driver for the aperture diffraction solvers.

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or environment (exit 2).
    Config(String),
    /// Solver or evaluation failure (exit 3).
    Solver(String),
    /// Failed accuracy checks (exit 4).
    Validation(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Validation(m) => f.write_str(m),
        }
    }
}

impl From<aperture_bie::Error> for CliError {
    fn from(e: aperture_bie::Error) -> Self {
        use aperture_bie::Error as E;
        match e {
            E::Solver { .. } | E::Singular(_) => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "aperture",
    version,
    about = "Diffraction by an aperture in a perfectly conducting screen"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` from the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random sampling.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Triangulate the aperture and write the mesh.
    Mesh,
    /// Assemble and solve, then run the residual checks.
    Solve,
    /// Solve and evaluate total fields at the configured sample points.
    Fields,
    /// Solve the vector problem and report transmitted power.
    Transmission,
    /// Solve on successively halved mesh sizes and report observed rates.
    Convergence {
        /// Number of levels (at least 3); overrides `convergence.levels`.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Run the acceptance suite.
    Validate {
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        /// Corrupt the solver on purpose to check that the suite notices.
        #[arg(long, hide = true, value_parser = ["incoming-branch"])]
        inject_fault: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
