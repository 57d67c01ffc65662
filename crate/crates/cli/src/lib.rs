//! Batch driver for the transient Otto engine: reads a flat `key = value`
//! configuration, runs one command and writes CSV tables.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub use config::{parse_config, ConfigError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Time-dependent hot-bath rate coefficients.
    Rates,
    /// Witness function and the Q quantifier across cutoffs.
    Nonmarkov,
    /// One finite-time cycle versus heating time.
    Simulate,
    /// Cycle summaries across cutoff frequencies.
    SweepCutoff,
    /// Finite-time efficiency versus hot-state population.
    SweepPopulation,
    /// Perfect-thermalization efficiency versus hot-state population.
    Ift,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Nonmarkov => "nonmarkov",
            Command::Simulate => "simulate",
            Command::SweepCutoff => "sweep-cutoff",
            Command::SweepPopulation => "sweep-population",
            Command::Ift => "ift",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "otto", version, about = "Transient quantum Otto engine in a non-Markovian bath")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Configuration file with `key = value` lines.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one key after the file is read. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output stem; files are written as STEM.csv and STEM_<part>.csv.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] otto_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(e: csv::Error) -> Self {
        CliError::Csv(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Files were written but no heating time gives engine operation.
    NoEngine,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NoEngine => 4,
        }
    }
}

/// Parse the configuration and run the command; returns the exit code
/// after reporting to stdout/stderr.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(status) => {
            if status == Status::NoEngine {
                eprintln!("no engine operation: W >= 0 or Q_hot <= 0 at every heating time");
            }
            status.exit_code()
        }
        Err(e) => {
            eprintln!("otto: {e}");
            e.exit_code()
        }
    }
}

pub fn try_run(cli: &Cli) -> Result<Status, CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(ConfigError {
                location: Some(path.display().to_string()),
                message: format!("cannot read config: {e}"),
            })
        })?,
        None => String::new(),
    };
    let cfg = parse_config(&text, &cli.set)?;
    let stem = cli.out.clone().unwrap_or_else(|| PathBuf::from(cli.command.name()));
    commands::dispatch(cli.command, &cfg, &stem)
}
