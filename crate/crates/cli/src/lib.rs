//! `sqlab`: seeded Monte Carlo campaigns over the square-path toolkit.
//!
//! Every command reads one JSON config, runs `trials` independent trials
//! (trial `i` seeded by a fixed hash of the master seed and `i`), and writes
//! CSV rows sorted by trial index, so outputs do not depend on scheduling.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("acceptance bar not met: {0}")]
    Bar(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Bar(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sqlab", version, about = "Square paths and square cycles in attacked random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Write a G(n, p) graph in the text format.
    Generate(CommonArgs),
    /// Apply an adversary and report what it removed.
    Attack(CommonArgs),
    /// Exact or greedy square path / cycle search.
    Search(CommonArgs),
    /// Partition, reduce and embed a long square cycle.
    Pipeline(CommonArgs),
    /// Expansion, triangle and path-count measurements with SVG plots.
    Measure(CommonArgs),
    /// Triangle pruning of random chains.
    Prune(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Generate(a)
            | Command::Attack(a)
            | Command::Search(a)
            | Command::Pipeline(a)
            | Command::Measure(a)
            | Command::Prune(a) => a,
        }
    }
}

/// Runs a parsed command.
pub fn run(command: &Command) -> Result<(), CliError> {
    let ctx = Context::new(command.args())?;
    match command {
        Command::Generate(_) => commands::generate(&ctx),
        Command::Attack(_) => commands::attack(&ctx),
        Command::Search(_) => commands::search(&ctx),
        Command::Pipeline(_) => commands::pipeline(&ctx),
        Command::Measure(_) => commands::measure(&ctx),
        Command::Prune(_) => commands::prune(&ctx),
    }
}

/// Command-line flags shared by every subcommand.
#[derive(Clone, Debug, clap::Args, PartialEq, Eq)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Loaded config plus the output directory, after command-line overrides.
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(args: &CommonArgs) -> Result<Self, CliError> {
        let mut config = ExperimentConfig::load(&args.config)?;
        if let Some(t) = args.trials {
            if t == 0 {
                return Err(CliError::Config("--trials must be positive".into()));
            }
            config.trials = t;
        }
        if let Some(s) = args.seed {
            config.master_seed = s;
        }
        let out = args
            .out
            .clone()
            .or_else(|| config.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        output::ensure_dir(&out)?;
        Ok(Context { config, out })
    }

    /// Runs `f(i, seed_i)` for every trial in parallel; results come back in
    /// trial order together with the wall time of each trial in milliseconds.
    pub fn run_trials<T, F>(&self, f: F) -> Vec<(T, f64)>
    where
        T: Send,
        F: Fn(usize, u64) -> T + Sync,
    {
        (0..self.config.trials)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let out = f(i, self.config.trial_seed(i));
                (out, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    }
}
