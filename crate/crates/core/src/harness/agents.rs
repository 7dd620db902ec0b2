//! Built-in bots. Each emits the candidate tree it considered alongside a
//! short reasoning text ending in a move tag.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::board::{BoardState, Coord, Outcome, Player};
use crate::heuristic::{evaluate, HeuristicParams};
use crate::tree::{SearchTree, TreeNode};

use super::AgentResponse;

/// Candidate first moves reported by the heuristic bots.
const REPORTED_CANDIDATES: usize = 4;
const WIN_VALUE: f64 = 1e9;

fn respond(state: &BoardState, chosen: Coord, roots: Vec<TreeNode>, notes: &[String]) -> AgentResponse {
    let mut text = String::new();
    for n in notes {
        text.push_str(n);
        text.push_str("\n\n");
    }
    text.push_str(&format!("<next_move>{}</next_move>", chosen.to_move_notation()));
    AgentResponse {
        text,
        tree: Some(SearchTree::new(roots).with_source(state.to_fen())),
    }
}

/// Uniform random move; reports it with up to three other random moves.
pub fn random_move(state: &BoardState, seed: u64) -> AgentResponse {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moves = state.legal_moves().expect("asked to move in a finished game");
    moves.shuffle(&mut rng);
    let chosen = moves[0];
    let k = rng.gen_range(2..=4).min(moves.len());
    let mut roots: Vec<TreeNode> = moves[..k].iter().map(|&m| TreeNode::leaf(m)).collect();
    roots.shuffle(&mut rng);
    let listed: Vec<String> = roots.iter().map(|n| n.mv.to_move_notation()).collect();
    respond(state, chosen, roots, &[format!("Options: {}.", listed.join(", "))])
}

/// Picks uniformly among the indices holding the maximum value.
fn argmax_random<R: Rng>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
    *ties.choose(rng).expect("at least one move")
}

/// Indices of the chosen move followed by the next best, by value.
fn reported(values: &[f64], chosen: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| i != chosen).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    std::iter::once(chosen)
        .chain(order)
        .take(REPORTED_CANDIDATES.min(values.len()))
        .collect()
}

/// Maximises the heuristic of the position right after the move.
pub fn myopic_move(state: &BoardState, params: &HeuristicParams, seed: u64) -> AgentResponse {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let me = state.to_move();
    let moves = state.legal_moves().expect("asked to move in a finished game");
    let values: Vec<f64> = moves
        .iter()
        .map(|&m| evaluate(&state.apply_move(m).expect("legal"), params, me))
        .collect();
    let chosen = argmax_random(&values, &mut rng);
    let picks = reported(&values, chosen);
    let notes = picks
        .iter()
        .map(|&i| format!("{} evaluates to {:.3}.", moves[i].to_move_notation(), values[i]))
        .collect::<Vec<_>>();
    let roots = picks.iter().map(|&i| TreeNode::leaf(moves[i])).collect();
    respond(state, moves[chosen], roots, &notes)
}

fn terminal_value(outcome: Outcome, me: Player, ply: usize) -> Option<f64> {
    match outcome.winner() {
        // Quicker wins and slower losses score better.
        Some(p) if p == me => Some(WIN_VALUE - ply as f64),
        Some(_) => Some(-WIN_VALUE + ply as f64),
        None => None,
    }
}

/// Alpha-beta minimax from `me`'s perspective; returns the value and the
/// principal variation below `state`.
fn search(
    state: &BoardState,
    depth_left: usize,
    ply: usize,
    mut alpha: f64,
    mut beta: f64,
    me: Player,
    params: &HeuristicParams,
) -> (f64, Vec<Coord>) {
    let outcome = state.winner();
    if let Some(v) = terminal_value(outcome, me, ply) {
        return (v, Vec::new());
    }
    if depth_left == 0 || outcome == Outcome::Draw {
        return (evaluate(state, params, me), Vec::new());
    }
    let maximising = state.to_move() == me;
    let mut best = if maximising { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut best_line = Vec::new();
    for m in state.legal_moves().expect("not terminal") {
        let child = state.apply_move(m).expect("legal");
        let (v, line) = search(&child, depth_left - 1, ply + 1, alpha, beta, me, params);
        let better = if maximising { v > best } else { v < best };
        if better {
            best = v;
            best_line = std::iter::once(m).chain(line).collect();
        }
        if maximising {
            alpha = alpha.max(best);
        } else {
            beta = beta.min(best);
        }
        if alpha >= beta {
            break;
        }
    }
    (best, best_line)
}

fn chain(moves: &[Coord]) -> TreeNode {
    let mut node = TreeNode::leaf(*moves.last().expect("non-empty line"));
    for &m in moves[..moves.len() - 1].iter().rev() {
        node = TreeNode::with_children(m, vec![node]);
    }
    node
}

/// Depth-limited minimax over every legal move. Each reported candidate
/// carries its principal variation.
pub fn full_tree_move(state: &BoardState, params: &HeuristicParams, depth_limit: usize, seed: u64) -> AgentResponse {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let me = state.to_move();
    let moves = state.legal_moves().expect("asked to move in a finished game");
    let depth = depth_limit.max(1);
    let results: Vec<(f64, Vec<Coord>)> = moves
        .iter()
        .map(|&m| {
            let child = state.apply_move(m).expect("legal");
            let (v, line) = search(&child, depth - 1, 1, f64::NEG_INFINITY, f64::INFINITY, me, params);
            (v, std::iter::once(m).chain(line).collect())
        })
        .collect();
    let values: Vec<f64> = results.iter().map(|r| r.0).collect();
    let chosen = argmax_random(&values, &mut rng);
    let picks = reported(&values, chosen);
    let notes = picks
        .iter()
        .map(|&i| {
            let line: Vec<String> = results[i].1.iter().map(|c| c.to_move_notation()).collect();
            format!("{} leads to {} with value {:.3}.", moves[i].to_move_notation(), line.join(" then "), values[i])
        })
        .collect::<Vec<_>>();
    let roots = picks.iter().map(|&i| chain(&results[i].1)).collect();
    respond(state, moves[chosen], roots, &notes)
}
