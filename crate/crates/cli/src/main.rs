//! `floquet`: susceptibility scans, stroboscopic evolution, steering
//! protocols and Magnus checks for a two-tone driven spin chain.

mod commands;
mod config;
mod plot;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "floquet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fidelity susceptibility over a frequency-time grid, with resonance lines.
    FsScan(Overrides),
    /// Stroboscopic evolution under one drive.
    Evolve(Overrides),
    /// Block protocol alternating the two interleaved drives.
    Steer(Overrides),
    /// One-period residual of the zeroth-order effective Hamiltonian over a
    /// coupling ladder.
    MagnusCheck(Overrides),
    /// Print a built-in configuration (or the defaults) as TOML.
    ShowConfig(Overrides),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(floquet_core::Error),
    Io(String),
}

impl From<floquet_core::Error> for CliError {
    fn from(e: floquet_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.0)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use floquet_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::Integrity(_) | E::SeriesNonConvergence { .. } => 3,
                E::Io(_) | E::Cache(_) => 1,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (overrides, action): (&Overrides, fn(&RunConfig) -> Result<(), CliError>) = match &cli.command {
        Command::FsScan(o) => (o, commands::fs_scan_cmd),
        Command::Evolve(o) => (o, commands::evolve_cmd),
        Command::Steer(o) => (o, commands::steer_cmd),
        Command::MagnusCheck(o) => (o, commands::magnus_check_cmd),
        Command::ShowConfig(o) => (o, show_config),
    };
    let cfg = RunConfig::resolve(overrides)?;
    action(&cfg)
}

fn show_config(cfg: &RunConfig) -> Result<(), CliError> {
    let text = toml::to_string(cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
