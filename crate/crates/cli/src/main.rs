//! `decobound`: tables of decoherence bounds, optomechanical predictions,
//! finite-statistics simulations and a self-certification battery.
//!
//! Exit codes: 0 success, 2 I/O, 3 configuration or usage, 4 certification
//! failure, 5 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{Config, CONFIG_ENV};
use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("certification failed")]
    Certification,
    #[error(transparent)]
    Numeric(#[from] decobound::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Config { .. } => 3,
            CliError::Certification => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "decobound", version, about = "Decoherence bounds from CHSH statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Overrides the command's grid size from the config.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Overrides the command's seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Quantum and no-signalling Dec bounds against β on [2, 4].
    Region,
    /// (β, Dec) for noisy entangled states under depolarizing and dephasing noise.
    Channels,
    /// Optomechanical decoherence curves and optimal measurement times.
    Optomech,
    /// Seeded Monte-Carlo CHSH runs with Hoeffding confidence radii.
    Simulate,
    /// SDP certificates, entropy oracle and bound self-checks.
    Certify,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(n) = cli.grid {
        if n < 2 {
            return Err(CliError::Config {
                path: "--grid".into(),
                message: format!("must be at least 2, got {n}"),
            });
        }
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Region => {
            commands::region(cli.grid.unwrap_or(cfg.grids.region))?.emit(cli.format, out)
        }
        Command::Channels => {
            commands::channels(cli.grid.unwrap_or(cfg.grids.channels))?.emit(cli.format, out)
        }
        Command::Optomech => {
            commands::optomech(&cfg, cli.grid.unwrap_or(cfg.grids.optomech))?.emit(cli.format, out)
        }
        Command::Simulate => {
            commands::simulate(&cfg, cli.seed.unwrap_or(cfg.seeds.simulate))?.emit(cli.format, out)
        }
        Command::Certify => {
            let (report, passed) = commands::certify(&cfg, cli.seed.unwrap_or(cfg.seeds.certify))?;
            report.emit(cli.format, out)?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Certification)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("decobound: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
