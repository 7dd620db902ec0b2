//! Synthetic choices and the two-condition model-recovery test.
//!
//! Condition 1 samples choices from the full-tree policy, condition 2 from
//! the myopic policy; both variants are refitted on each synthetic set and
//! compared through `delta = nll_myopic - nll_full_tree` (per sample).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::board::{BoardState, Coord};
use crate::fit::{fit_compiled, CompiledDataset, FitError, FitOptions, TurnRecord};
use crate::heuristic::HeuristicParams;
use crate::policy::{CompiledChoice, ModelVariant};
use crate::seed::derive_seed;
use crate::tree::{SearchTree, TreeNode};

pub const DEFAULT_SYNTHETIC_N: usize = 500;

/// Generator parameters used when no fitted parameters are available.
pub fn default_generator_params() -> HeuristicParams {
    HeuristicParams::new(0.6, [1.0, 0.5, 2.5, 10.0], 1.5, 0.0).expect("valid")
}

/// Shape of randomly generated stimulus trees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusConfig {
    pub min_breadth: usize,
    pub max_breadth: usize,
    pub min_depth: usize,
    pub max_depth: usize,
    /// Replies per expanded node below the root, drawn from `1..=max_replies`.
    pub max_replies: usize,
    /// Random plies played from the empty board before the decision.
    pub max_opening_plies: usize,
}

impl Default for StimulusConfig {
    fn default() -> Self {
        StimulusConfig {
            min_breadth: 2,
            max_breadth: 6,
            min_depth: 1,
            max_depth: 4,
            max_replies: 3,
            max_opening_plies: 14,
        }
    }
}

fn random_position<R: Rng>(rng: &mut R, max_plies: usize) -> BoardState {
    loop {
        let plies = rng.gen_range(0..=max_plies);
        let mut state = BoardState::empty();
        let mut ok = true;
        for _ in 0..plies {
            let moves = match state.legal_moves() {
                Ok(m) => m,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            state = state.apply_move(*moves.choose(rng).expect("non-terminal")).expect("legal");
        }
        if ok && !state.winner().is_terminal() {
            return state;
        }
    }
}

fn random_subtree<R: Rng>(rng: &mut R, state: &BoardState, mv: Coord, depth: usize, limit: usize, cfg: &StimulusConfig) -> TreeNode {
    let next = state.apply_move(mv).expect("generator plays legal moves");
    let mut node = TreeNode::leaf(mv);
    if depth >= limit || next.winner().is_terminal() {
        return node;
    }
    let mut replies = next.legal_moves().expect("non-terminal");
    replies.shuffle(rng);
    let k = rng.gen_range(1..=cfg.max_replies).min(replies.len());
    node.children = replies[..k]
        .iter()
        .map(|&r| random_subtree(rng, &next, r, depth + 1, limit, cfg))
        .collect();
    node
}

/// A random legal tree rooted at `root`. The depth limit is drawn once per
/// tree and at least one candidate reaches it unless a game ends first.
pub fn random_tree<R: Rng>(rng: &mut R, root: &BoardState, cfg: &StimulusConfig) -> SearchTree {
    let mut moves = root.legal_moves().expect("stimulus roots are non-terminal");
    moves.shuffle(rng);
    let breadth = rng.gen_range(cfg.min_breadth..=cfg.max_breadth).min(moves.len());
    let limit = rng.gen_range(cfg.min_depth..=cfg.max_depth);
    let roots = moves[..breadth]
        .iter()
        .enumerate()
        .map(|(i, &mv)| {
            // The first candidate always expands; the rest expand half the time.
            let own_limit = if i == 0 || rng.gen_bool(0.5) { limit } else { 1 };
            random_subtree(rng, root, mv, 1, own_limit, cfg)
        })
        .collect();
    SearchTree::new(roots).with_source(root.to_fen())
}

/// `n` stimulus turns with random positions and random legal trees. The
/// chosen move is a placeholder (the first candidate) until simulated.
pub fn random_stimuli(n: usize, seed: u64, cfg: &StimulusConfig) -> Vec<TurnRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "stimuli"));
    (0..n)
        .map(|i| {
            let root = random_position(&mut rng, cfg.max_opening_plies);
            let tree = random_tree(&mut rng, &root, cfg);
            TurnRecord {
                game_id: format!("synthetic-{seed}"),
                turn_index: i as u32,
                fen: root.to_fen(),
                player: root.to_move(),
                chosen_move: tree.roots.first().map(|n| n.mv),
                raw_response: String::new(),
                tree: Some(tree),
                model_name: "synthetic".into(),
            }
        })
        .collect()
}

fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Replaces each record's chosen move with a draw from the variant's choice
/// distribution. Records whose candidates cannot be built keep their move.
pub fn simulate_choices(records: &[TurnRecord], params: &HeuristicParams, variant: ModelVariant, seed: u64) -> Vec<TurnRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("simulate/{variant}")));
    records
        .iter()
        .map(|r| {
            let mut out = r.clone();
            let choice = BoardState::parse_fen_with_player(&r.fen, r.player)
                .ok()
                .and_then(|root| CompiledChoice::build(&root, r.tree.as_ref(), variant).ok());
            if let Some(choice) = choice {
                let dist = choice.distribution(params, variant);
                out.chosen_move = Some(dist.candidates[sample_index(&mut rng, &dist.probs)]);
            }
            out
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOutcome {
    pub generator: ModelVariant,
    /// Per-sample `nll_myopic - nll_full_tree` on the refits.
    pub delta: f64,
    pub recovered: bool,
    pub n: usize,
    pub seed: u64,
    pub nll_full_tree: f64,
    pub nll_myopic: f64,
}

fn run_condition(
    records: &[TurnRecord],
    generator: ModelVariant,
    params: &HeuristicParams,
    seed: u64,
    options: &FitOptions,
) -> Result<RecoveryOutcome, FitError> {
    let synthetic = simulate_choices(records, params, generator, derive_seed(seed, &format!("recover/{generator}")));
    let mut nll = [0.0; 2];
    for (slot, variant) in [ModelVariant::FullTree, ModelVariant::Myopic].into_iter().enumerate() {
        let data = CompiledDataset::new(&synthetic, variant)?;
        let opts = FitOptions {
            seed: derive_seed(seed, &format!("recover/{generator}/fit/{variant}")),
            ..*options
        };
        nll[slot] = fit_compiled(&data, &opts)?.nll_per_sample;
    }
    let delta = nll[1] - nll[0];
    let recovered = match generator {
        ModelVariant::FullTree => delta > 0.0,
        _ => delta < 0.0,
    };
    Ok(RecoveryOutcome {
        generator,
        delta,
        recovered,
        n: synthetic.len(),
        seed,
        nll_full_tree: nll[0],
        nll_myopic: nll[1],
    })
}

/// Runs both conditions. Refits start from fresh random restarts.
pub fn recovery_test(
    records: &[TurnRecord],
    fitted_full: &HeuristicParams,
    fitted_myopic: &HeuristicParams,
    seed: u64,
    options: &FitOptions,
) -> Result<(RecoveryOutcome, RecoveryOutcome), FitError> {
    let full = run_condition(records, ModelVariant::FullTree, fitted_full, seed, options)?;
    let myopic = run_condition(records, ModelVariant::Myopic, fitted_myopic, seed, options)?;
    Ok((full, myopic))
}
