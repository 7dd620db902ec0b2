//! Dataset filtering, likelihood and multi-restart maximum-likelihood fits.

mod record;

pub use record::{parse_any_move, read_records, write_records, RecordError, TurnRecord};

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::BoardState;
use crate::heuristic::{HeuristicParams, C_MAX, C_MIN};
use crate::optim::{minimize, Bounds, OptimOptions, Termination};
use crate::policy::{CompiledChoice, ModelVariant};
use crate::seed::derive_seed;

/// Fewest surviving turns a model needs before it is fitted.
pub const MIN_TURNS_PER_MODEL: usize = 20;
pub const DEFAULT_RESTARTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("turn {game_id}#{turn_index}: chosen move is not a candidate")]
    ChosenNotCandidate { game_id: String, turn_index: u32 },
    #[error("turn {game_id}#{turn_index}: {reason}")]
    UnusableRecord {
        game_id: String,
        turn_index: u32,
        reason: String,
    },
    #[error("no records to fit")]
    EmptyDataset,
    #[error("every restart ended with a non-finite objective")]
    OptimizationDiverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExclusionReason {
    InvalidMove,
    NoTree,
    DegenerateTree,
    ChosenNotInTree,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExclusionReason::InvalidMove => "invalid-move",
            ExclusionReason::NoTree => "no-tree",
            ExclusionReason::DegenerateTree => "degenerate-tree",
            ExclusionReason::ChosenNotInTree => "chosen-not-in-tree",
        })
    }
}

/// First applicable exclusion reason, checked in priority order.
pub fn exclusion_reason(record: &TurnRecord) -> Option<ExclusionReason> {
    let legal = BoardState::parse_fen_with_player(&record.fen, record.player)
        .ok()
        .zip(record.chosen_move)
        .is_some_and(|(state, mv)| state.apply_move(mv).is_ok());
    if !legal {
        return Some(ExclusionReason::InvalidMove);
    }
    let Some(tree) = record.tree.as_ref().filter(|t| !t.roots.is_empty()) else {
        return Some(ExclusionReason::NoTree);
    };
    if tree.roots.len() < 2 {
        return Some(ExclusionReason::DegenerateTree);
    }
    if !record.chosen_move.is_some_and(|mv| tree.contains_candidate(mv)) {
        return Some(ExclusionReason::ChosenNotInTree);
    }
    None
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<TurnRecord>,
    pub excluded: Vec<(TurnRecord, ExclusionReason)>,
    /// Whether each model kept enough turns to be fitted.
    pub model_ok: BTreeMap<String, bool>,
}

impl FilterOutcome {
    pub fn kept_for(&self, model: &str) -> Vec<TurnRecord> {
        self.kept.iter().filter(|r| r.model_name == model).cloned().collect()
    }

    pub fn exclusion_counts(&self) -> BTreeMap<ExclusionReason, usize> {
        let mut out = BTreeMap::new();
        for (_, reason) in &self.excluded {
            *out.entry(*reason).or_insert(0) += 1;
        }
        out
    }
}

pub fn filter_dataset(records: &[TurnRecord]) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for r in records {
        out.model_ok.entry(r.model_name.clone()).or_insert(false);
        match exclusion_reason(r) {
            Some(reason) => out.excluded.push((r.clone(), reason)),
            None => out.kept.push(r.clone()),
        }
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &out.kept {
        *counts.entry(r.model_name.as_str()).or_insert(0) += 1;
    }
    for (model, ok) in out.model_ok.iter_mut() {
        *ok = counts.get(model.as_str()).copied().unwrap_or(0) >= MIN_TURNS_PER_MODEL;
    }
    out
}

/// Records compiled once for repeated likelihood evaluation.
#[derive(Debug, Clone)]
pub struct CompiledDataset {
    pub variant: ModelVariant,
    pub choices: Vec<CompiledChoice>,
    pub chosen: Vec<usize>,
}

impl CompiledDataset {
    pub fn new(records: &[TurnRecord], variant: ModelVariant) -> Result<CompiledDataset, FitError> {
        let compiled: Vec<(CompiledChoice, usize)> = records
            .par_iter()
            .map(|r| compile_record(r, variant))
            .collect::<Result<_, _>>()?;
        let (choices, chosen) = compiled.into_iter().unzip();
        Ok(CompiledDataset {
            variant,
            choices,
            chosen,
        })
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Mean negative log-likelihood, summed in record order.
    pub fn nll(&self, params: &HeuristicParams) -> f64 {
        let total: f64 = self
            .choices
            .iter()
            .zip(&self.chosen)
            .map(|(c, &i)| c.neg_log_prob(params, self.variant, i))
            .sum();
        total / self.choices.len() as f64
    }

    pub fn accuracy(&self, params: &HeuristicParams) -> f64 {
        let hits = self
            .choices
            .iter()
            .zip(&self.chosen)
            .filter(|(c, &i)| c.distribution(params, self.variant).predict_move() == c.candidates[i])
            .count();
        hits as f64 / self.choices.len() as f64
    }
}

fn compile_record(r: &TurnRecord, variant: ModelVariant) -> Result<(CompiledChoice, usize), FitError> {
    let unusable = |reason: String| FitError::UnusableRecord {
        game_id: r.game_id.clone(),
        turn_index: r.turn_index,
        reason,
    };
    let root = BoardState::parse_fen_with_player(&r.fen, r.player).map_err(|e| unusable(e.to_string()))?;
    let choice = CompiledChoice::build(&root, r.tree.as_ref(), variant).map_err(|e| unusable(e.to_string()))?;
    let chosen = r
        .chosen_move
        .and_then(|mv| choice.position(mv))
        .ok_or_else(|| FitError::ChosenNotCandidate {
            game_id: r.game_id.clone(),
            turn_index: r.turn_index,
        })?;
    Ok((choice, chosen))
}

pub fn dataset_nll(records: &[TurnRecord], params: &HeuristicParams, variant: ModelVariant) -> Result<f64, FitError> {
    if records.is_empty() {
        return Err(FitError::EmptyDataset);
    }
    Ok(CompiledDataset::new(records, variant)?.nll(params))
}

/// Free parameters of a variant packed into an optimiser vector:
/// five weights, `log C`, and `gamma` for the discount model only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub variant: ModelVariant,
}

impl ParamLayout {
    pub fn new(variant: ModelVariant) -> ParamLayout {
        ParamLayout { variant }
    }

    pub fn dim(&self) -> usize {
        if self.variant == ModelVariant::Discount {
            7
        } else {
            6
        }
    }

    pub fn fixed_gamma(&self) -> f64 {
        match self.variant {
            ModelVariant::FullTree => 1.0,
            _ => 0.0,
        }
    }

    pub fn bounds(&self) -> Bounds {
        let mut b = Bounds::unbounded(self.dim());
        b.lower[5] = C_MIN.ln();
        b.upper[5] = C_MAX.ln();
        if self.dim() == 7 {
            b.lower[6] = 0.0;
            b.upper[6] = 1.0;
        }
        b
    }

    pub fn unpack(&self, x: &[f64]) -> HeuristicParams {
        HeuristicParams {
            w_centre: x[0],
            w: [x[1], x[2], x[3], x[4]],
            c: x[5].exp(),
            gamma: if self.dim() == 7 { x[6] } else { self.fixed_gamma() },
        }
    }

    pub fn pack(&self, p: &HeuristicParams) -> Vec<f64> {
        let mut x = vec![p.w_centre, p.w[0], p.w[1], p.w[2], p.w[3], p.c.ln()];
        if self.dim() == 7 {
            x.push(p.gamma);
        }
        x
    }

    /// Weights uniform on [-1, 1], `log C` uniform over its bounds, `gamma`
    /// uniform on [0, 1].
    pub fn random_start<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        x.push(rng.gen_range(C_MIN.ln()..=C_MAX.ln()));
        if self.dim() == 7 {
            x.push(rng.gen_range(0.0..=1.0));
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub n_restarts: usize,
    pub seed: u64,
    pub optim: OptimOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_restarts: DEFAULT_RESTARTS,
            seed: 0,
            optim: OptimOptions::default(),
        }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> FitOptions {
        FitOptions {
            seed,
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub nll: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub variant: ModelVariant,
    pub params: HeuristicParams,
    pub nll_per_sample: f64,
    pub accuracy: f64,
    pub n_samples: usize,
    pub restarts: Vec<RestartSummary>,
    pub seed: u64,
    pub options: FitOptions,
}

impl FitResult {
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("variant = {}\n", self.variant));
        out.push_str(&self.params.to_kv());
        out.push_str(&format!("nll_per_sample = {:?}\n", self.nll_per_sample));
        out.push_str(&format!("accuracy = {:?}\n", self.accuracy));
        out.push_str(&format!("n_samples = {}\n", self.n_samples));
        out.push_str(&format!("n_restarts = {}\n", self.restarts.len()));
        out.push_str(&format!("seed = {}\n", self.seed));
        out
    }
}

pub fn fit_model(records: &[TurnRecord], variant: ModelVariant, options: &FitOptions) -> Result<FitResult, FitError> {
    if records.is_empty() {
        return Err(FitError::EmptyDataset);
    }
    let data = CompiledDataset::new(records, variant)?;
    fit_compiled(&data, options)
}

pub fn fit_compiled(data: &CompiledDataset, options: &FitOptions) -> Result<FitResult, FitError> {
    if data.is_empty() {
        return Err(FitError::EmptyDataset);
    }
    let layout = ParamLayout::new(data.variant);
    let bounds = layout.bounds();
    let objective = |x: &[f64]| data.nll(&layout.unpack(x));

    let runs: Vec<(u64, crate::optim::OptimResult)> = (0..options.n_restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(options.seed, &format!("fit/{}/restart/{i}", data.variant));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = layout.random_start(&mut rng);
            (seed, minimize(objective, &x0, &bounds, &options.optim))
        })
        .collect();

    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, (_, r))| r.f.is_finite())
        .min_by(|(i, (_, a)), (j, (_, b))| a.f.total_cmp(&b.f).then(i.cmp(j)))
        .map(|(i, _)| i)
        .ok_or(FitError::OptimizationDiverged)?;
    let params = layout.unpack(&runs[best].1.x);
    Ok(FitResult {
        variant: data.variant,
        params,
        nll_per_sample: runs[best].1.f,
        accuracy: data.accuracy(&params),
        n_samples: data.len(),
        restarts: runs
            .iter()
            .map(|(seed, r)| RestartSummary {
                seed: *seed,
                nll: r.f,
                iterations: r.iterations,
                termination: r.termination,
            })
            .collect(),
        seed: options.seed,
        options: *options,
    })
}
