use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bounds_cmd;
mod config;
mod disttest;
mod experiment;
mod ingest;
mod output;

#[derive(Debug, Parser)]
#[command(name = "pairstream", version, about = "Online pairwise learning with finite buffers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train and evaluate OLP for every (policy, buffer size, seed) in the grid.
    Run(config::ExperimentArgs),
    /// Like `run`, but needs at least two buffer sizes and adds a per-(policy, s) summary.
    Sweep(experiment::SweepArgs),
    /// Print the Rademacher bound tables and, if inputs allow, the excess-risk rows.
    Bounds(bounds_cmd::BoundsArgs),
    /// Monte-Carlo checks of a buffer policy's sampling law.
    Disttest(disttest::DisttestArgs),
    /// Parse a LIBSVM file and report dataset statistics.
    Ingest(ingest::IngestArgs),
}

/// Exit code 1 for bad configuration, 2 for failures at run time.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => experiment::cmd_run(args),
        Command::Sweep(args) => experiment::cmd_sweep(args),
        Command::Bounds(args) => bounds_cmd::cmd_bounds(args),
        Command::Disttest(args) => disttest::cmd_disttest(args),
        Command::Ingest(args) => ingest::cmd_ingest(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pairstream: {e}");
            ExitCode::from(e.code())
        }
    }
}
