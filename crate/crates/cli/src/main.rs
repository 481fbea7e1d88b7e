//! `levctl`: solve the leverage-ratio control problem, simulate the
//! controlled diffusion, sweep regulatory grids, and reproduce the
//! published reference tables.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leverage_control::Error;

#[derive(Parser)]
#[command(name = "levctl", version, about = "Bank leverage-ratio control: solver, simulator, regulatory sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the variational inequality and extract the threshold policy.
    Solve {
        /// JSON configuration file; defaults to the reference baseline.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also solve the no-issuance benchmark and report the relative
        /// issuance value.
        #[arg(long)]
        benchmark: bool,
        /// Accept parameters in the immediate-liquidation regime.
        #[arg(long)]
        allow_degenerate: bool,
        /// Evaluate the two-dimensional value l * v(x / l).
        #[arg(long, num_args = 2, value_names = ["L", "X"])]
        eval_2d: Option<Vec<f64>>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Simulate the controlled diffusion under the solved policy.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        y0: Option<f64>,
        /// Record per-step trajectories.
        #[arg(long)]
        record: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Sweep regulatory grids and extract the safety-profitability
    /// frontier.
    Frontier {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Survival constraints to optimize for (repeatable).
        #[arg(long = "eta")]
        etas: Vec<f64>,
        /// Worker thread cap for the parallel sweep.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the full reference battery and compare against the published
    /// values.
    ReproducePaper {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Monte Carlo paths for the stochastic comparisons.
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker thread cap.
        #[arg(long)]
        workers: Option<usize>,
    },
}

/// Exit codes: 2 configuration error, 3 infeasible parameters, 4 solver
/// failure.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::InvalidConfig(_) | Error::BelowDomain(_) => 2,
        Error::Infeasible(_) => 3,
        _ => 4,
    }
}

fn install_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, benchmark, allow_degenerate, eval_2d, out } => {
            commands::solve::run(config, benchmark, allow_degenerate, eval_2d, out)
        }
        Command::Simulate { config, seed, paths, dt, horizon, y0, record, out } => {
            commands::simulate::run(config, seed, paths, dt, horizon, y0, record, out)
        }
        Command::Frontier { config, etas, workers, out } => {
            install_workers(workers);
            commands::frontier_cmd::run(config, etas, out)
        }
        Command::ReproducePaper { out, paths, seed, workers } => {
            install_workers(workers);
            commands::reproduce::run(out, paths, seed)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
