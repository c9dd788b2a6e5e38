use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oppsched::experiment::{parse_seeds, run, Command, ExperimentConfig, Overrides};
use oppsched::Error;

/// Batch runner for scheduler optimisation, simulation and energy studies.
#[derive(Parser)]
#[command(name = "oppsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Anneal one scheduler per seed.
    Optimize(Args),
    /// Anneal across the configured sweep.
    Sweep(Args),
    /// Simulate a given or freshly optimised scheduler.
    Simulate(Args),
    /// Unconstrained optimum and its CCON-violation probability.
    GammaMax(Args),
    /// Smallest buffer meeting a target energy gain.
    BufferSearch(Args),
    /// Finite user group energies under estimation error.
    FiniteK(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds; replaces the config's list.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    slots: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Optimize(a) => (Command::Optimize, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::GammaMax(a) => (Command::GammaMax, a),
        Cmd::BufferSearch(a) => (Command::BufferSearch, a),
        Cmd::FiniteK(a) => (Command::FiniteK, a),
    };
    match execute(command, args) {
        Ok(dir) => {
            println!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command, args: Args) -> oppsched::Result<PathBuf> {
    let config = ExperimentConfig::load(&args.config)?;
    let overrides = Overrides {
        out: args.out,
        seeds: args.seeds.as_deref().map(parse_seeds).transpose()?,
        slots: args.slots,
        jobs: args.jobs,
    };
    Ok(run(command, config, &overrides)?.output_dir)
}
