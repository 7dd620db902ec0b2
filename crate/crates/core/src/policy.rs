//! Choice models over candidate first moves.
//!
//! Every model scores a candidate by a backed-up value and turns values into
//! probabilities with a softmax. The heuristic is always read from the
//! perspective of the player to move at the root; the opponent minimises at
//! odd depths and the mover maximises at even depths.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BoardState, Coord, Player};
use crate::heuristic::{FeatureVector, HeuristicParams};
use crate::tree::{SearchTree, TreeNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("illegal move {mv} at depth {depth} of the branch rooted at {root}")]
    IllegalPath { root: Coord, mv: Coord, depth: usize },
    #[error("no candidate moves")]
    NoCandidates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    FullTree,
    Myopic,
    Discount,
    NoTree,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 4] = [
        ModelVariant::FullTree,
        ModelVariant::Myopic,
        ModelVariant::Discount,
        ModelVariant::NoTree,
    ];

    pub fn uses_tree(self) -> bool {
        self != ModelVariant::NoTree
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::FullTree => "full-tree",
            ModelVariant::Myopic => "myopic",
            ModelVariant::Discount => "discount",
            ModelVariant::NoTree => "no-tree",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "full-tree" | "fulltree" | "full" => Ok(ModelVariant::FullTree),
            "myopic" => Ok(ModelVariant::Myopic),
            "discount" => Ok(ModelVariant::Discount),
            "no-tree" | "notree" => Ok(ModelVariant::NoTree),
            other => Err(format!("unknown model variant `{other}`")),
        }
    }
}

/// A tree node with the heuristic features of the state it leads to.
/// Nodes whose move could not be replayed carry the features of the last
/// legal state and no children.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledNode {
    pub features: FeatureVector,
    pub children: Vec<CompiledNode>,
}

impl CompiledNode {
    /// Backed-up value of a node at `depth` (candidates are depth 1).
    pub fn value(&self, params: &HeuristicParams, variant: ModelVariant, depth: usize) -> f64 {
        let h = self.features.value(params);
        if self.children.is_empty() {
            return h;
        }
        match variant {
            ModelVariant::Myopic | ModelVariant::NoTree => h,
            ModelVariant::FullTree => self.extreme(params, variant, depth),
            ModelVariant::Discount => {
                let g = params.gamma;
                (1.0 - g) * h + g * self.extreme(params, variant, depth)
            }
        }
    }

    fn extreme(&self, params: &HeuristicParams, variant: ModelVariant, depth: usize) -> f64 {
        let values = self.children.iter().map(|c| c.value(params, variant, depth + 1));
        // After an odd number of plies the opponent is to move.
        if depth % 2 == 1 {
            values.fold(f64::INFINITY, f64::min)
        } else {
            values.fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OnIllegal {
    Truncate,
    Reject,
}

fn compile_node(
    node: &TreeNode,
    state: &BoardState,
    perspective: Player,
    root_move: Coord,
    depth: usize,
    on_illegal: OnIllegal,
    truncations: &mut usize,
) -> Result<CompiledNode, PolicyError> {
    match state.apply_move(node.mv) {
        Ok(next) => {
            let children = node
                .children
                .iter()
                .map(|c| compile_node(c, &next, perspective, root_move, depth + 1, on_illegal, truncations))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(CompiledNode {
                features: FeatureVector::of(&next, perspective),
                children,
            })
        }
        Err(_) if on_illegal == OnIllegal::Truncate => {
            *truncations += 1;
            Ok(CompiledNode {
                features: FeatureVector::of(state, perspective),
                children: Vec::new(),
            })
        }
        Err(_) => Err(PolicyError::IllegalPath {
            root: root_move,
            mv: node.mv,
            depth,
        }),
    }
}

/// Backed-up value of a depth-1 node. Errors if any move on the replayed
/// paths is illegal.
pub fn backup_value(
    node: &TreeNode,
    root: &BoardState,
    params: &HeuristicParams,
    variant: ModelVariant,
) -> Result<f64, PolicyError> {
    let mut unused = 0;
    let compiled = compile_node(node, root, root.to_move(), node.mv, 1, OnIllegal::Reject, &mut unused)?;
    Ok(compiled.value(params, variant, 1))
}

/// One decision with its candidate states precomputed, so that values can
/// be recomputed cheaply for many parameter vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledChoice {
    pub candidates: Vec<Coord>,
    pub nodes: Vec<CompiledNode>,
    /// Nodes cut short because their move could not be replayed.
    pub truncations: usize,
}

impl CompiledChoice {
    /// Tree candidates, truncating illegal paths at the last legal state.
    pub fn from_tree(root: &BoardState, tree: &SearchTree) -> Result<CompiledChoice, PolicyError> {
        if tree.roots.is_empty() {
            return Err(PolicyError::NoCandidates);
        }
        let mut truncations = 0;
        let nodes = tree
            .roots
            .iter()
            .map(|n| compile_node(n, root, root.to_move(), n.mv, 1, OnIllegal::Truncate, &mut truncations))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CompiledChoice {
            candidates: tree.candidates(),
            nodes,
            truncations,
        })
    }

    /// Every legal move of `root` as a leaf candidate.
    pub fn from_legal_moves(root: &BoardState) -> Result<CompiledChoice, PolicyError> {
        let moves = root.legal_moves().map_err(|_| PolicyError::NoCandidates)?;
        if moves.is_empty() {
            return Err(PolicyError::NoCandidates);
        }
        let perspective = root.to_move();
        let nodes = moves
            .iter()
            .map(|&mv| CompiledNode {
                features: FeatureVector::of(&root.place(mv).expect("legal move"), perspective),
                children: Vec::new(),
            })
            .collect();
        Ok(CompiledChoice {
            candidates: moves,
            nodes,
            truncations: 0,
        })
    }

    pub fn build(
        root: &BoardState,
        tree: Option<&SearchTree>,
        variant: ModelVariant,
    ) -> Result<CompiledChoice, PolicyError> {
        match (variant, tree) {
            (ModelVariant::NoTree, _) => CompiledChoice::from_legal_moves(root),
            (_, Some(t)) => CompiledChoice::from_tree(root, t),
            (_, None) => Err(PolicyError::NoCandidates),
        }
    }

    pub fn values(&self, params: &HeuristicParams, variant: ModelVariant) -> Vec<f64> {
        self.nodes.iter().map(|n| n.value(params, variant, 1)).collect()
    }

    pub fn position(&self, mv: Coord) -> Option<usize> {
        self.candidates.iter().position(|&c| c == mv)
    }

    pub fn distribution(&self, params: &HeuristicParams, variant: ModelVariant) -> ChoiceDistribution {
        ChoiceDistribution::from_values(self.candidates.clone(), &self.values(params, variant))
    }

    /// `-log P(candidate index)`.
    pub fn neg_log_prob(&self, params: &HeuristicParams, variant: ModelVariant, index: usize) -> f64 {
        let values = self.values(params, variant);
        log_sum_exp(&values) - values[index]
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceDistribution {
    pub candidates: Vec<Coord>,
    pub probs: Vec<f64>,
    pub log_probs: Vec<f64>,
}

impl ChoiceDistribution {
    /// Softmax of `values`, evaluated in log space.
    pub fn from_values(candidates: Vec<Coord>, values: &[f64]) -> ChoiceDistribution {
        assert_eq!(candidates.len(), values.len());
        let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = values.iter().map(|v| (v - m).exp()).collect();
        let z: f64 = shifted.iter().sum();
        let lse = m + z.ln();
        let log_probs = values.iter().map(|v| v - lse).collect();
        let probs = shifted.iter().map(|e| e / z).collect();
        ChoiceDistribution {
            candidates,
            probs,
            log_probs,
        }
    }

    pub fn prob_of(&self, mv: Coord) -> Option<f64> {
        self.candidates.iter().position(|&c| c == mv).map(|i| self.probs[i])
    }

    /// Most probable candidate; ties go to the earliest.
    pub fn predict_move(&self) -> Coord {
        let mut best = 0;
        for i in 1..self.log_probs.len() {
            if self.log_probs[i] > self.log_probs[best] {
                best = i;
            }
        }
        self.candidates[best]
    }
}

pub fn choice_distribution(
    root: &BoardState,
    tree: Option<&SearchTree>,
    params: &HeuristicParams,
    variant: ModelVariant,
) -> Result<ChoiceDistribution, PolicyError> {
    Ok(CompiledChoice::build(root, tree, variant)?.distribution(params, variant))
}

pub fn predict_move(dist: &ChoiceDistribution) -> Coord {
    dist.predict_move()
}
