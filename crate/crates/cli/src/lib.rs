//! Experiment driver for zw-measures: every command is a pure function of
//! its configuration and seed.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{parse_pair, Overrides, Pair, RunConfig};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "gtzw", version, about = "Sampling and diagnostics for zw-measures on the Gelfand-Tsetlin graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Run the oracle suites and report residuals.
    Verify,
    /// Sample paths to JSON lines.
    Sample,
    /// Likelihood-ratio fluctuations between two parameter pairs.
    Fluctuation,
    /// Diagonal growth quantiles, the c1 fit and the envelope comparison.
    Growth,
    /// Build and verify a monotone coupling.
    Coupling,
}

/// Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `re` or `re,im`.
    #[arg(long, global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    pub z: Option<Pair>,
    #[arg(long, global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    pub w: Option<Pair>,
    #[arg(long, global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    pub zp: Option<Pair>,
    #[arg(long, global = true, value_parser = parse_pair, allow_hyphen_values = true)]
    pub wp: Option<Pair>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<i64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub eps_tail: Option<f64>,
    #[arg(long, global = true)]
    pub gibbs_sweeps: Option<usize>,
}

impl Flags {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            z: self.z,
            w: self.w,
            zp: self.zp,
            wp: self.wp,
            k: self.k,
            delta: self.delta,
            n_levels: self.levels,
            n_paths: self.paths,
            eps_tail: self.eps_tail,
            gibbs_sweeps: self.gibbs_sweeps,
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> CliResult<()> {
    match command {
        Command::Verify => commands::cmd_verify(cfg).map(drop),
        Command::Sample => commands::cmd_sample(cfg).map(drop),
        Command::Fluctuation => commands::cmd_fluctuation(cfg).map(drop),
        Command::Growth => commands::cmd_growth(cfg).map(drop),
        Command::Coupling => commands::cmd_coupling(cfg).map(drop),
    }
}
