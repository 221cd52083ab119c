mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "ghzprep", version, about = "Dissipative GHZ preparation: simulations, sweeps and rate tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Optimizer seed, overriding `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for sweeps and the optimizer.
    #[arg(long, global = true, env = "GHZPREP_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate one configuration from the maximally mixed state.
    Simulate,
    /// Time to target fidelity over register sizes and models.
    Sweep,
    /// Numerically minimize the preparation time.
    Optimize,
    /// Compartment-model constants and stationary errors.
    Ratemodel,
    /// Print the analytic drive parameters as JSON.
    Params,
}

const DEFAULT_OUT: &str = "ghzprep-out";

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let hash = cfg.hash();
    if let Command::Params = cli.command {
        println!("{}", run::params(&cfg, &hash)?);
        return Ok(());
    }
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(cfg.output.dir.as_deref().unwrap_or(DEFAULT_OUT)));
    let dir = output::prepare_dir(&dir)?;
    let command = cli.command;
    let written = ghz_core::par::with_threads(cli.threads, || match command {
        Command::Simulate => run::simulate(&cfg, &dir, &hash),
        Command::Sweep => run::sweep(&cfg, &dir, &hash),
        Command::Optimize => run::optimize(&cfg, &dir, &hash),
        Command::Ratemodel => run::ratemodel(&cfg, &dir, &hash),
        Command::Params => unreachable!("handled above"),
    })?;
    for path in written {
        println!("wrote {path}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ghzprep: {e}");
            e.exit_code()
        }
    }
}
