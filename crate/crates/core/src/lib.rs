//! Four-in-a-row planning analysis: game engine, search-tree tooling,
//! heuristic choice models and their maximum-likelihood fits.

pub mod analysis;
pub mod board;
pub mod fit;
pub mod harness;
pub mod heuristic;
pub mod intervene;
pub mod optim;
pub mod policy;
pub mod recovery;
pub mod seed;
pub mod tree;

pub use board::{all_windows, BoardError, BoardState, Cell, Coord, Outcome, Player, Window};
pub use heuristic::{count_features, evaluate, FeatureCounts, FeatureVector, HeuristicParams};
pub use policy::{backup_value, choice_distribution, predict_move, ChoiceDistribution, ModelVariant};
pub use tree::{SearchTree, TreeMetrics, TreeNode};
pub use fit::{dataset_nll, filter_dataset, fit_model, ExclusionReason, FitOptions, FitResult, TurnRecord};
