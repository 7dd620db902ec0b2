//! The `fiar` command line.

pub mod config;
mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

pub(crate) fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{context}: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "fiar", version, about = "Four-in-a-row planning analysis")]
pub struct Cli {
    /// TOML run configuration; FIAR_* environment variables override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed (overrides the configuration).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Restarts per fit.
    #[arg(long)]
    pub restarts: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play one game between two agents and write its log.
    Play {
        /// Agent spec for White, e.g. `myopic` or `bot=external:python3 agent.py`.
        #[arg(long)]
        white: String,
        #[arg(long)]
        black: String,
        #[arg(long, default_value = "game-00000")]
        game_id: String,
        /// Re-ask after an invalid move instead of forfeiting.
        #[arg(long)]
        retry: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Round-robin tournament between agents.
    ///
    /// Agent specs are `[name=]kind[:argument]` with kinds `random`,
    /// `myopic[:params-file]`, `full-tree[:depth]` and `external:<command>`.
    Tournament {
        /// Comma-separated agent specs.
        #[arg(long, value_delimiter = ',')]
        agents: Option<Vec<String>>,
        #[arg(long)]
        games_per_pair: Option<usize>,
        /// Print the schedule without playing.
        #[arg(long)]
        dry_run: bool,
        #[arg(long)]
        retry: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check every record's tree and list exclusion candidates.
    ValidateTrees {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Per-model search-effort metrics.
    Metrics {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Game logs supplying winning rates.
        #[arg(long)]
        games: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit one model variant to every model in a dataset.
    Fit {
        #[arg(long)]
        variant: String,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Fit only this model.
        #[arg(long)]
        model: Option<String>,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Fit all four variants per model and compare them.
    Compare {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        games: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Model-recovery test on a dataset's trees or on synthetic stimuli.
    Recover {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Synthetic turns when no dataset is given.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Least-squares regression with permutation p-values on a CSV table.
    Regress {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        y: String,
        /// Comma-separated predictor columns.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        /// Column of observation weights.
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        permutations: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Apply pruning strategies to a labelled trace.
    Prune {
        #[arg(long)]
        trace: PathBuf,
        /// JSON array of paragraph labels.
        #[arg(long)]
        labels: PathBuf,
        /// `fd`, `fd+branch:r,c`, `addback-d1:r,c` or `addback-d12:r,c`; repeatable.
        #[arg(long = "strategy", required = true)]
        strategies: Vec<String>,
        /// Write the bundle here instead of standard output.
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
    /// Tournament, metrics, fits, comparisons and analysis tables in one run.
    Report {
        #[arg(long, value_delimiter = ',')]
        agents: Option<Vec<String>>,
        #[arg(long)]
        games_per_pair: Option<usize>,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Print the prompts an external agent receives for a position.
    Prompt {
        #[arg(long, default_value = "9/9/9/9")]
        fen: String,
    },
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), std::env::vars()).map_err(CliError::Usage)?;
    commands::dispatch(cli.command, &mut cfg)
}
