//! Command-line front end for `pauli-ssf`.
//!
//! Every subcommand reads a TOML [`RunConfig`], writes `<stem>.csv` and a
//! `<stem>.report.json` sidecar into the output directory, and exits with
//! 0 (success), 1 (configuration error), 2 (convergence failure) or
//! 3 (invariant violation).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::Outcome;
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numeric(#[from] pauli_ssf::Error),
    #[error("{0}")]
    Convergence(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use pauli_ssf::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numeric(E::ConvergenceFailure { .. } | E::NearSingularGram { .. }) => 2,
            CliError::Numeric(_) => 1,
            CliError::Convergence(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pauli-ssf",
    version,
    about = "Effective spectral shift computations for 3D Pauli operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Seed for the randomized self-checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Projection kernel diagonal on a grid with its two-sided bounds.
    Kernel,
    /// Toeplitz eigenvalue counts against the comparator.
    Toeplitz,
    /// Effective spectral shift corridors along the energy sweep.
    Ssf,
    /// Ratio ξ(E)/ξ(−E) along a decreasing energy sweep.
    Levinson,
    /// Constant-field integrated density of states.
    Ids {
        /// Single energy; prints the value instead of writing a table.
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
        /// Mean field for `--energy`, overriding `field.b0`.
        #[arg(long)]
        b0: Option<f64>,
    },
    /// Quadrature, truncation, trace and duality checks.
    Selfcheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Toeplitz => "toeplitz",
            Command::Ssf => "ssf",
            Command::Levinson => "levinson",
            Command::Ids { .. } => "ids",
            Command::Selfcheck => "selfcheck",
        }
    }
}

pub fn execute(command: &Command, config: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    config.note_ignored_entries();
    match command {
        Command::Kernel => commands::cmd_kernel(config),
        Command::Toeplitz => commands::cmd_toeplitz(config),
        Command::Ssf => commands::cmd_ssf(config),
        Command::Levinson => commands::cmd_levinson(config),
        Command::Ids { .. } => commands::cmd_ids(config),
        Command::Selfcheck => commands::cmd_selfcheck(config, seed),
    }
}

/// Writes the tables and report; returns the path of the main CSV.
pub fn write_outcome(outcome: &Outcome, dir: &Path, stem: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, outcome.table.to_csv())?;
    for (suffix, table) in &outcome.extra {
        std::fs::write(dir.join(format!("{stem}.{suffix}.csv")), table.to_csv())?;
    }
    std::fs::write(
        dir.join(format!("{stem}.report.json")),
        outcome.report.to_json(),
    )?;
    Ok(csv)
}

fn run_inner(cli: &Cli) -> Result<Option<CliError>, CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Command::Ids {
        energy: Some(e),
        b0,
    } = &cli.command
    {
        let v = pauli_ssf::ssf::ids_constant_field(*e, b0.unwrap_or(config.field.b0))?;
        println!("{}", output::format_float(v.value));
        if v.on_landau_level {
            log::warn!("E = {e} lies on a Landau level; reporting the left limit");
        }
        return Ok(None);
    }
    let outcome = execute(&cli.command, &config, cli.seed)?;
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let stem = config.output.stem.as_deref().unwrap_or(cli.command.name());
    let path = write_outcome(&outcome, &dir, stem)?;
    log::info!("wrote {}", path.display());
    if let Some(msg) = &outcome.message {
        println!("{msg}");
    }
    Ok(outcome.violation)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    match run_inner(cli) {
        Ok(None) => 0,
        Ok(Some(violation)) => {
            eprintln!("error: {violation}");
            violation.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
