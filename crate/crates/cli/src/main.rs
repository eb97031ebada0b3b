//! `lab`: reproducible experiment harness for the dynamics laboratory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible parameters,
//! 4 numeric failure.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use run::Runner;

#[derive(Parser)]
#[command(name = "lab", version, about = "Smooth 1-D dynamics laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Lyapunov exponents and the uniform-integrability defect table.
    Lyapunov(StageArgs),
    /// Shadowing decomposition, coverage and per-lemma assertion summary.
    Shadowing(StageArgs),
    /// Entropy estimates and the main-theorem gap report.
    Gap(StageArgs),
    /// Exact combinatorial type counts.
    Types(StageArgs),
    /// Every stage in order on one shared configuration.
    All(StageArgs),
}

#[derive(clap::Args, Clone)]
struct StageArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; 0 = LAB_WORKERS or the rayon default.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory (defaults to the config's out_dir or "out").
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<shadowlab::Error>() {
        Some(shadowlab::Error::InfeasibleParameters(_)) => 3,
        Some(_) => 4,
        // configuration / IO problems
        None => 2,
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    let args = match &cmd {
        Command::Lyapunov(a)
        | Command::Shadowing(a)
        | Command::Gap(a)
        | Command::Types(a)
        | Command::All(a) => a.clone(),
    };
    let (cfg, text) = ExperimentConfig::from_path(&args.config)?;

    let workers = if args.workers > 0 {
        args.workers
    } else if cfg.workers > 0 {
        cfg.workers
    } else {
        std::env::var("LAB_WORKERS").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
    };
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    }

    let out_dir = args
        .out
        .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let mut runner = Runner::new(cfg, &text, out_dir)?;
    match cmd {
        Command::Lyapunov(_) => runner.run_lyapunov()?,
        Command::Shadowing(_) => runner.run_shadowing()?,
        Command::Gap(_) => runner.run_gap()?,
        Command::Types(_) => runner.run_types()?,
        Command::All(_) => {
            runner.run_lyapunov()?;
            runner.run_shadowing()?;
            runner.run_gap()?;
        }
    }
    runner.finish()
}
