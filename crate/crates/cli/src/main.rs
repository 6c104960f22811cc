//! Configuration-driven batch driver for the simulation toolkit.
//!
//! Every subcommand reads one TOML file, runs deterministically for a given
//! seed, writes CSV/JSON data files into the output directory, and stores a
//! resolved-config snapshot next to them so the run can be repeated without
//! the original file. Exit codes: 0 success, 2 configuration error, 3
//! numerical-convergence failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig};
use rydsim_core::SimError;

#[derive(Parser, Debug)]
#[command(name = "rydsim", version, about = "Rydberg ladder simulation toolkit")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "rydsim.toml")]
    config: PathBuf,
    /// Seed override (defaults to the config seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap (defaults to the available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a disorder-robust GHZ preparation pulse.
    GhzOptimize,
    /// Evolve under a pulse file and emit the full analysis bundle.
    GhzEvolve,
    /// Synthesize the entangling gate, benchmark it, and report the error
    /// budget.
    GateBench,
    /// Post-selected decay curves and fitted time constants.
    Decay,
    /// Motional-state-preserving pulse sweep.
    Mpp,
    /// Re-analyze a shot file.
    Analyze,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(String),
    Numerical(String),
    Other(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Convergence { .. } | SimError::Stalled(_) => Failure::Numerical(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: failed to size thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    std::fs::create_dir_all(&cli.out)?;
    let command_name = match cli.command {
        Command::GhzOptimize => "ghz-optimize",
        Command::GhzEvolve => "ghz-evolve",
        Command::GateBench => "gate-bench",
        Command::Decay => "decay",
        Command::Mpp => "mpp",
        Command::Analyze => "analyze",
    };
    output::write_snapshot(&cli.out, command_name, &config)?;
    match cli.command {
        Command::GhzOptimize => commands::ghz_optimize::run(&config, &cli.out),
        Command::GhzEvolve => commands::ghz_evolve::run(&config, &cli.out),
        Command::GateBench => commands::gate_bench::run(&config, &cli.out),
        Command::Decay => commands::decay::run(&config, &cli.out),
        Command::Mpp => commands::mpp::run(&config, &cli.out),
        Command::Analyze => commands::analyze::run(&config, &cli.out),
    }
}
