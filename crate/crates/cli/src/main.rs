//! `tunnelcat` — config-driven runner for ancilla-assisted tunneling
//! experiments.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tunnelcat_cli::config::{ExperimentConfig, Mode};
use tunnelcat_cli::error::CliError;
use tunnelcat_cli::runner;

#[derive(Parser)]
#[command(name = "tunnelcat", version, about = "Ancilla-assisted tunneling simulator and optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured system (and optional ancilla) and emit P(t) curves
    Simulate(RunArgs),
    /// Optimize the ancilla, coupling and time against the configured system
    Train(RunArgs),
    /// Train every (n_s, n_a, seed) cell of the configured grid in parallel
    Sweep(RunArgs),
    /// Cross-validate the simulator against the solvable-limit closed form
    OracleCheck(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the experiment TOML
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides optimizer.seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Also emit SVG plots
    #[arg(long)]
    plot: bool,
    /// Integrator step override
    #[arg(long)]
    dt: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TUNNELCAT_LOG", "info"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (expected_mode, args) = match &cli.command {
        Command::Simulate(args) => (Mode::Simulate, args),
        Command::Train(args) => (Mode::Train, args),
        Command::Sweep(args) => (Mode::Sweep, args),
        Command::OracleCheck(args) => (Mode::OracleCheck, args),
    };

    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.mode != expected_mode {
        return Err(CliError::Config(format!(
            "config mode {:?} does not match the {:?} subcommand",
            cfg.mode, expected_mode
        )));
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.optimizer.seed = seed;
    }
    if args.plot {
        cfg.output.plot = true;
    }
    if let Some(dt) = args.dt {
        cfg.integrator.dt = dt;
    }
    cfg.validate()?;

    if let Some(workers) = args.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))?;
    }

    runner::run(&cfg)
}
