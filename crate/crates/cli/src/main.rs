//! `phq`: command-line front end for metric-space quantum computations.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, Outcome};
use error::{config_err, CliResult};

#[derive(Parser)]
#[command(name = "phq", version, about = "Quantum mechanics with a non-trivial Hilbert-space metric")]
struct Cli {
    /// Seed for every random draw; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Numerical tolerance; overrides `tol` in the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file; overrides `output` in the config. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and check a metric.
    Metric { config: PathBuf },
    /// Compare tensor-product partitions under two metrics.
    Partition { config: PathBuf },
    /// Tomography.
    #[command(subcommand)]
    Tomo(Tomo),
    /// Check a bipartite POVM for signalling.
    Nosignal { config: PathBuf },
    /// Quantum-jump trajectories.
    Dynamics { config: PathBuf },
    /// GNS representation of a state on a matrix algebra.
    Gns { config: PathBuf },
}

#[derive(Subcommand)]
enum Tomo {
    /// Sample Stern-Gerlach measurement records as JSON lines.
    Simulate { config: PathBuf },
    /// Linear-inversion reconstruction from records or expectations.
    Reconstruct { config: PathBuf },
}

type Runner = fn(&Ctx) -> CliResult<Outcome>;

fn run(cli: Cli) -> CliResult<(Outcome, Option<PathBuf>)> {
    let (path, runner): (PathBuf, Runner) = match cli.command {
        Command::Metric { config } => (config, commands::metric),
        Command::Partition { config } => (config, commands::partition),
        Command::Tomo(Tomo::Simulate { config }) => (config, commands::tomo_simulate),
        Command::Tomo(Tomo::Reconstruct { config }) => (config, commands::tomo_reconstruct),
        Command::Nosignal { config } => (config, commands::nosignal),
        Command::Dynamics { config } => (config, commands::dynamics),
        Command::Gns { config } => (config, commands::gns),
    };
    let loaded = config::load(&path)?;
    let tol = cli.tol.or(loaded.file.tol).unwrap_or(phq_core::DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(config_err(format!("tolerance must be positive and finite, got {tol}")));
    }
    let out = cli.out.or_else(|| loaded.file.output.as_deref().map(|p| loaded.resolve_path(p)));
    let ctx = Ctx { seed: cli.seed.or(loaded.file.seed), tol, loaded };
    Ok((runner(&ctx)?, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(outcome, out)| {
        match out {
            Some(path) => output::write_atomic(&path, &outcome.text)?,
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(outcome.text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|source| error::CliError::Write { path: PathBuf::from("<stdout>"), source })?;
            }
        }
        Ok(outcome.exit)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("phq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
