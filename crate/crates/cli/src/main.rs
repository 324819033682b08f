mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::Value;

use commands::Flags;
use config::{FlatConfig, RunConfig};
use error::{CliError, CliResult};
use output::OutDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Solve the boundary-value problem and write the trajectory.
    Path,
    /// Scan det J along the path for focal points.
    Detj,
    /// Evaluate the semiclassical kernel.
    Kernel,
    /// Propagate a Gaussian wavepacket with the tabulated kernel.
    Evolve,
    /// One-degree-of-freedom gauge reduction and quadrature check.
    Reduce,
}

/// Semiclassical propagators from classical paths.
#[derive(Debug, Parser)]
#[command(name = "semiclassic", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` file, or a JSON summary from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare against the exact kernel where one exists.
    #[arg(long)]
    oracle: bool,
    /// Treat boundary leaks as failures.
    #[arg(long)]
    strict: bool,
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("SEMICLASSIC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::config(
            "SEMICLASSIC_THREADS",
            format!("expected a positive integer, got `{raw}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config("SEMICLASSIC_THREADS", e.to_string()))
}

fn run(cli: &Cli) -> CliResult<Value> {
    configure_threads()?;
    let mut flat = FlatConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        flat.set("output.dir", out.to_string_lossy());
    }
    let cfg = RunConfig::from_flat(flat)?;
    let out = OutDir::create(&cfg.output)?;
    let flags = Flags {
        oracle: cli.oracle,
        strict: cli.strict,
    };
    match cli.command {
        Command::Path => commands::cmd_path(&cfg, &out),
        Command::Detj => commands::cmd_detj(&cfg, &out),
        Command::Kernel => commands::cmd_kernel(&cfg, &out, flags),
        Command::Evolve => commands::cmd_evolve(&cfg, &out, flags),
        Command::Reduce => commands::cmd_reduce(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config("arguments", e.to_string());
            eprintln!("{}", output::to_json_string(&err.to_json()));
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            println!("{}", output::to_json_string(&summary));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", output::to_json_string(&err.to_json()));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
