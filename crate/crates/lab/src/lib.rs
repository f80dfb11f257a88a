//! Command-line laboratory around `jmgt-core`: TOML configuration, parallel
//! scheduling, reproducible output directories with a manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use clap::{Parser, Subcommand};
use config::{ExperimentConfig, Mode};
use error::LabError;
use io::{sha256_hex, OutputDir};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "jmgt", version, about = "Forward and inverse experiments for the JMGT equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides [run] out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides [run] threads and JMGT_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for the noise generator; overrides [run] seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Measurement mode; overrides [recon] mode.
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve the linear or nonlinear forward problem.
    Forward,
    /// Remainder decay of one probe over the sigma list.
    CgoSweep,
    /// Second-order linearization by cross differences.
    Linearize,
    /// Recover p from simulated measurements.
    Reconstruct,
    /// Check the configuration without solving.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::CgoSweep => "cgo-sweep",
            Command::Linearize => "linearize",
            Command::Reconstruct => "reconstruct",
            Command::Validate => "validate",
        }
    }
}

/// Applies command-line overrides, then `JMGT_THREADS` when no flag was given.
pub fn effective_config(cli: &Cli) -> Result<(ExperimentConfig, String), LabError> {
    let path = cli.config.as_ref().ok_or_else(|| LabError::Config("--config <path> is required".into()))?;
    let (mut cfg, text) = ExperimentConfig::load(path)?;
    if let Some(o) = &cli.out {
        cfg.run.out = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(m) = cli.mode {
        cfg.recon.mode = m;
    }
    match cli.threads {
        Some(t) => cfg.run.threads = t,
        None => {
            if let Ok(v) = std::env::var("JMGT_THREADS") {
                cfg.run.threads = v.parse().map_err(|_| LabError::Config(format!("JMGT_THREADS={v:?} is not a number")))?;
            }
        }
    }
    Ok((cfg, text))
}

/// Runs one subcommand and returns the JSON summary printed on stdout.
pub fn run(cli: &Cli) -> Result<serde_json::Value, LabError> {
    let (cfg, text) = effective_config(cli)?;
    if cli.command == Command::Validate {
        return commands::validate(&cfg, &text);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    let hash = sha256_hex(serde_json::to_string(&cfg)?.as_bytes());
    let mut out = OutputDir::create(&cfg.run.out, cli.command.name(), hash, cfg.run.seed, pool.current_num_threads())?;
    let result = match cli.command {
        Command::Forward => commands::forward(&cfg, &mut out),
        Command::CgoSweep => commands::cgo_sweep(&cfg, &mut out, &pool),
        Command::Linearize => commands::linearize(&cfg, &mut out),
        Command::Reconstruct => commands::reconstruct(&cfg, &mut out, &pool).and_then(|r| Ok(serde_json::to_value(r)?)),
        Command::Validate => unreachable!(),
    };
    // the manifest is written even when the command fails part way
    out.finish()?;
    result
}
