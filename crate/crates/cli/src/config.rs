//! Run configuration.
//!
//! Values come from the built-in defaults, then an optional TOML file, then
//! environment variables, then command-line flags. Environment variables
//! use the `FIAR_` prefix; nested keys are joined with a double underscore,
//! e.g. `FIAR_SEED=3` or `FIAR_TOURNAMENT__GAMES_PER_PAIR=2`. Values are read
//! as TOML literals and fall back to plain strings.
//!
//! Every task derives its own seed from `seed` and a task path such as
//! `fit/<model>/<variant>`, so adding or reordering tasks never shifts the
//! randomness of the others.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use fiar_core::seed::derive_seed;

pub const ENV_PREFIX: &str = "FIAR_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for every randomised task.
    pub seed: u64,
    /// Input dataset of turn records.
    pub dataset: Option<PathBuf>,
    /// Directory for artifacts.
    pub output: PathBuf,
    pub fit: FitConfig,
    pub tournament: TournamentConfig,
    pub analysis: AnalysisConfig,
    pub recovery: RecoveryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once an accepted step lowers the mean NLL by less than this.
    pub ftol: f64,
    /// Stop once the projected gradient's largest entry is below this.
    pub gtol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentConfig {
    /// Agent specs, see `fiar tournament --help`.
    pub agents: Vec<String>,
    pub games_per_pair: usize,
    /// Re-ask an agent (up to 3 times) after an invalid move instead of forfeiting.
    pub retry_invalid: bool,
    /// Per-move limit for external agents.
    pub move_timeout_secs: u64,
    pub full_tree_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Weight cross-model regressions by each model's turn count.
    pub weighted: bool,
    pub permutations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    /// Synthetic turns when no dataset is given.
    pub n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            dataset: None,
            output: PathBuf::from("fiar-out"),
            fit: FitConfig::default(),
            tournament: TournamentConfig::default(),
            analysis: AnalysisConfig::default(),
            recovery: RecoveryConfig::default(),
        }
    }
}

impl Default for FitConfig {
    fn default() -> Self {
        let o = fiar_core::optim::OptimOptions::default();
        FitConfig {
            restarts: fiar_core::fit::DEFAULT_RESTARTS,
            max_iter: o.max_iter,
            ftol: o.ftol,
            gtol: o.gtol,
        }
    }
}

impl Default for TournamentConfig {
    fn default() -> Self {
        TournamentConfig {
            agents: vec!["random".into(), "myopic".into(), "full-tree".into()],
            games_per_pair: fiar_core::harness::DEFAULT_GAMES_PER_PAIR,
            retry_invalid: false,
            move_timeout_secs: fiar_core::harness::DEFAULT_MOVE_TIMEOUT.as_secs(),
            full_tree_depth: fiar_core::harness::DEFAULT_FULL_TREE_DEPTH,
        }
    }
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            weighted: false,
            permutations: fiar_core::analysis::DEFAULT_PERMUTATIONS,
        }
    }
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            n: fiar_core::recovery::DEFAULT_SYNTHETIC_N,
        }
    }
}

fn parse_env_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl RunConfig {
    /// Defaults overlaid with `file` (if any) and then `env`.
    pub fn load(file: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> Result<RunConfig, String> {
        let mut table = toml::Table::try_from(RunConfig::default()).map_err(|e| e.to_string())?;
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let overlay: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
            merge(&mut table, overlay);
        }
        for (key, value) in env {
            let Some(rest) = key.strip_prefix(ENV_PREFIX) else { continue };
            let path: Vec<String> = rest.split("__").map(str::to_ascii_lowercase).collect();
            let mut cursor = &mut table;
            for segment in &path[..path.len() - 1] {
                cursor = match cursor
                    .entry(segment.clone())
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                {
                    toml::Value::Table(t) => t,
                    _ => return Err(format!("{key}: `{segment}` is not a section")),
                };
            }
            cursor.insert(path[path.len() - 1].clone(), parse_env_value(&value));
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| format!("invalid configuration: {e}"))
    }

    /// Canonical TOML form, written next to every run's artifacts.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn task_seed(&self, task: &str) -> u64 {
        derive_seed(self.seed, task)
    }

    pub fn fit_options(&self, task: &str) -> fiar_core::FitOptions {
        let optim = fiar_core::optim::OptimOptions {
            max_iter: self.fit.max_iter,
            ftol: self.fit.ftol,
            gtol: self.fit.gtol,
            ..Default::default()
        };
        fiar_core::FitOptions {
            n_restarts: self.fit.restarts,
            seed: self.task_seed(task),
            optim,
        }
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
