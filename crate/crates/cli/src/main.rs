//! Command-line front end: trajectory runs, error-rate sweeps, density-map
//! analysis, non-ergodicity certificates, and the enumeration oracles.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "voterlab", version, about = "Majority-voter automaton toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and emit its density trace as CSV.
    Simulate(CommonArgs),
    /// Run replicated trajectories across an error-rate grid.
    Sweep(CommonArgs),
    /// Fixed points and critical error rate of the density map.
    Meanfield(CommonArgs),
    /// Emit a certificate JSON, optionally with a Monte Carlo check.
    Bounds(CommonArgs),
    /// Run the enumeration oracle suites and report PASS/FAIL.
    Oracle(CommonArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Writes the primary output to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the replica count from the configuration.
    #[arg(long)]
    pub replicas: Option<u32>,
    /// Worker thread count. Affects speed only, never results.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum AppError {
    Core(voterlab_core::Error),
    Config(String),
    Io(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Core(err) => err.fmt(f),
            AppError::Config(msg) | AppError::Io(msg) => f.write_str(msg),
        }
    }
}

impl From<voterlab_core::Error> for AppError {
    fn from(err: voterlab_core::Error) -> AppError {
        AppError::Core(err)
    }
}

/// Exit discipline: 2 rejects arguments or configuration, 3 flags a
/// failed consistency check, 4 a refused enumeration budget, 1 anything
/// else (I/O, internal). Success is 0.
fn exit_for(err: &AppError) -> u8 {
    use voterlab_core::Error::*;
    match err {
        AppError::Core(InvalidParameter(_)) | AppError::Core(ConditionViolated(_)) => 2,
        AppError::Core(Inconsistency(_)) => 3,
        AppError::Core(BudgetExceeded(_)) => 4,
        AppError::Config(_) => 2,
        AppError::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, handler): (&CommonArgs, fn(&CommonArgs) -> Result<u8, AppError>) =
        match &cli.command {
            Command::Simulate(a) => (a, commands::simulate),
            Command::Sweep(a) => (a, commands::sweep),
            Command::Meanfield(a) => (a, commands::meanfield),
            Command::Bounds(a) => (a, commands::bounds),
            Command::Oracle(a) => (a, commands::oracle),
        };
    if let Some(n) = args.threads {
        voterlab_core::par::set_threads(n);
    }
    match handler(args) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
