//! Command-line frontend: simulate trajectories, solve for fixed points,
//! certify stability, and sweep the reinforcement parameter.
//!
//! Exit codes: 0 success (any verdict, including inconclusive), 2 invalid
//! config or invocation, 3 invalid initial point, 4 solver non-convergence,
//! 5 invalid certification target.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    BadP0(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error("{0}")]
    BadTarget(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::BadP0(_) => 3,
            CliError::NoConvergence(_) => 4,
            CliError::BadTarget(_) => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FixedPointStrategy {
    Auto,
    Kappa,
    Multistart,
    ClosedForm,
    Grouping,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TargetKind {
    Point,
    Orbit,
    Global,
}

#[derive(Parser)]
#[command(
    name = "simplexdyn",
    version,
    about = "Nonlinear Markov chains on the probability simplex: simulate, solve, certify, sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the map and write the trajectory as CSV.
    Simulate {
        /// Path to the JSON model config.
        #[arg(long)]
        config: PathBuf,
        /// Initial point: "uniform", "vertex:i", or "x,y,z".
        #[arg(long, default_value = "uniform")]
        p0: String,
        /// Number of steps (the CSV has steps + 1 rows).
        #[arg(long)]
        steps: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find fixed points and write them as JSON.
    FixedPoints {
        #[arg(long)]
        config: PathBuf,
        /// Solver: auto picks closed-form, scalar bisection, grouped Picard,
        /// or multistart based on the model structure.
        #[arg(long, value_enum, default_value_t = FixedPointStrategy::Auto)]
        strategy: FixedPointStrategy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify stability of a fixed point, an orbit, or the global map.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        target: TargetKind,
        /// Fixed point "x,y,z" for --target point; auto-discovered if omitted.
        #[arg(long)]
        point: Option<String>,
        /// JSON file {"points": [[...], ...]} for --target orbit;
        /// auto-detected from a long trajectory if omitted.
        #[arg(long)]
        orbit_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep gamma over a:b:step and write one CSV row per value.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Range "a:b:step", inclusive of both ends.
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            p0,
            steps,
            out,
        } => {
            let raw = config::read_config(&config)?;
            config::install_tolerances(&raw)?;
            commands::cmd_simulate(&raw, &p0, steps, out)
        }
        Command::FixedPoints {
            config,
            strategy,
            out,
        } => {
            let raw = config::read_config(&config)?;
            config::install_tolerances(&raw)?;
            commands::cmd_fixed_points(&raw, strategy, out)
        }
        Command::Certify {
            config,
            target,
            point,
            orbit_file,
            out,
        } => {
            let raw = config::read_config(&config)?;
            config::install_tolerances(&raw)?;
            commands::cmd_certify(&raw, target, point, orbit_file, out)
        }
        Command::Sweep { config, gamma, out } => {
            let raw = config::read_config(&config)?;
            config::install_tolerances(&raw)?;
            commands::cmd_sweep(&raw, &gamma, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
