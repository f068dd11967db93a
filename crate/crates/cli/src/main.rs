//! `bindet`: Cramér-Rao bounds and Monte Carlo validation for emitter
//! localization with binary sensors.
//!
//! Exit codes: 0 success, 1 failed check or computation error, 2 config
//! error, 3 closed-form fallback to quadrature, 4 all simulation trials failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use bindet::detection::ModelError;
use bindet::specfun::SpecFunError;
use bindet::FisherError;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::Config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Compute(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Write { .. } => 1,
        }
    }
}

impl From<FisherError> for CliError {
    fn from(e: FisherError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<SpecFunError> for CliError {
    fn from(e: SpecFunError) -> Self {
        CliError::Compute(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "bindet",
    version,
    about = "Cramér-Rao bounds and ML simulation for emitter localization with binary sensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected Fisher information and CRBs over a threshold sweep (CSV)
    Crb(Common),
    /// Monte Carlo campaign of the ML estimator against the CRB (CSV)
    Simulate(Common),
    /// Consistency checks at the configured parameters
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one setting; repeatable, applied last
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write output here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Base settings
    #[arg(long, value_name = "NAME", default_value = "paper-sec5")]
    preset: String,
}

type Handler = fn(&Config) -> Result<commands::Output, CliError>;

fn run(cli: Cli) -> Result<i32, CliError> {
    let (common, cmd): (&Common, Handler) = match &cli.command {
        Command::Crb(c) => (c, commands::crb),
        Command::Simulate(c) => (c, commands::simulate),
        Command::Check(c) => (c, commands::check),
    };
    let cfg = Config::resolve(&common.preset, common.config.as_deref(), &common.set)?;
    let output = cmd(&cfg)?;
    match &common.out {
        Some(path) => std::fs::write(path, &output.text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?,
        None => print!("{}", output.text),
    }
    Ok(output.code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("bindet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
