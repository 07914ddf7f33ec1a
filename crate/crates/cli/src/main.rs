// SPDX-License-Identifier: Apache-2.0

//! `ionlattice` command-line front end.
//!
//! Exit status: 0 success, 1 I/O failure, 2 config error, 3 fit or compile
//! failure, 4 numeric failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ionlattice::Error;

use config::RunConfig;
use output::OutputDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::InvalidChain(_)
                | Error::InvalidLattice(_)
                | Error::DimensionMismatch { .. }
                | Error::TooLarge { .. }
                | Error::InvalidProfile(_)
                | Error::InvalidTrap(_)
                | Error::DetuningOrder(_) => 2,
                Error::NonIntegerPhase { .. }
                | Error::ConflictingConstraint { .. }
                | Error::InvalidFilter(_)
                | Error::FitFailure { .. }
                | Error::NegativeCentralPulse { .. }
                | Error::SelfVerification { .. }
                | Error::MalformedSequence(_)
                | Error::ZeroTarget
                | Error::MismatchedCycles(..) => 3,
                _ => 4,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ionlattice", version, about = "Compile and simulate gradient-tagged lattice pulse sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `schedule.n_cycles` in the config.
    #[arg(long, global = true)]
    cycles: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Fit the filter and write the pulse schedule.
    Compile,
    /// Write engineered, target and normalized coupling matrices.
    Couplings,
    /// Stroboscopic evolution against the ideal lattice.
    Simulate,
    /// Simulate with the two-phase schedule from the `quench` section.
    Quench,
    /// Normal modes and Molmer-Sorensen couplings.
    Ms,
    /// Coupling error under gradient phase noise.
    SweepNoise,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Compile => "compile",
            Command::Couplings => "couplings",
            Command::Simulate => "simulate",
            Command::Quench => "quench",
            Command::Ms => "ms",
            Command::SweepNoise => "sweep-noise",
        }
    }
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(c) = cli.cycles {
        cfg.schedule.n_cycles = c;
    }
    let mut out = OutputDir::new(&cli.out, cli.command.name(), &cfg.to_toml())?;
    let summary = match cli.command {
        Command::Compile => commands::compile(&cfg, &mut out),
        Command::Couplings => commands::couplings(&cfg, &mut out),
        Command::Simulate => commands::simulate(&cfg, &mut out),
        Command::Quench => commands::quench(&cfg, &mut out),
        Command::Ms => commands::ms(&cfg, &mut out),
        Command::SweepNoise => commands::sweep_noise(&cfg, &mut out),
    }?;
    let files: Vec<String> = out.written().iter().map(|p| p.display().to_string()).collect();
    Ok(format!("{summary}\nwrote {}", files.join(", ")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            if !cli.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ionlattice: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
