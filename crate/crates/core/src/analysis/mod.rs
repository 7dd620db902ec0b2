//! Per-model summaries, variant comparisons, weight normalisation and
//! regressions across models.

mod output;
mod regress;

pub use output::{figure_specs, model_rows, write_report, FigureSpec, ModelRow, ReportTables};
pub use regress::{regress, RegressOptions, RegressionResult, DEFAULT_PERMUTATIONS};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::Outcome;
use crate::fit::{CompiledDataset, FitError, FitResult, TurnRecord};
use crate::heuristic::HeuristicParams;
use crate::policy::ModelVariant;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("fits were made on different datasets ({0})")]
    MismatchedDatasets(String),
    #[error("no fit for the {0} variant")]
    MissingVariant(ModelVariant),
    #[error("design matrix is singular")]
    SingularDesign,
    #[error("{n} observations cannot identify {parameters} coefficients")]
    TooFewObservations { n: usize, parameters: usize },
    #[error("predictor, outcome and weight lengths differ")]
    LengthMismatch,
    #[error("four-in-a-row weight is zero")]
    ZeroFourWeight,
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// One finished game as seen by the standings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameResult {
    pub game_id: String,
    pub white: String,
    pub black: String,
    pub outcome: Outcome,
}

impl GameResult {
    /// Points for `player`: 1 for a win, 0.5 for a draw, 0 for a loss.
    /// None when the player did not take part or the game is unfinished.
    pub fn score_for(&self, player: &str) -> Option<f64> {
        let colour = if self.white == player {
            Outcome::White
        } else if self.black == player {
            Outcome::Black
        } else {
            return None;
        };
        match self.outcome {
            Outcome::Ongoing => None,
            Outcome::Draw => Some(0.5),
            o if o == colour => Some(1.0),
            _ => Some(0.0),
        }
    }
}

/// Fraction of points won, draws counting half. None without games.
pub fn winning_rate(player: &str, results: &[GameResult]) -> Option<f64> {
    let scores: Vec<f64> = results.iter().filter_map(|g| g.score_for(player)).collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model_name: String,
    pub n_turns: usize,
    pub n_games: usize,
    pub winning_rate: Option<f64>,
    pub mean_tree_size: Option<f64>,
    pub mean_breadth: Option<f64>,
    pub mean_max_depth: Option<f64>,
    /// Mean breadth over mean maximum depth.
    pub breadth_depth_ratio: Option<f64>,
    /// Mean node count at depth 1, 2, ...; shallower trees count zero.
    pub per_depth_means: Vec<f64>,
}

/// Summarises `model_name`'s turns that carry a tree and its games.
pub fn summarize_model(model_name: &str, records: &[TurnRecord], results: &[GameResult]) -> ModelSummary {
    let metrics: Vec<_> = records
        .iter()
        .filter(|r| r.model_name == model_name)
        .filter_map(|r| r.tree.as_ref().map(|t| t.measure()))
        .collect();
    let n = metrics.len();
    let mean = |f: &dyn Fn(&crate::tree::TreeMetrics) -> f64| {
        (n > 0).then(|| metrics.iter().map(f).sum::<f64>() / n as f64)
    };
    let mean_tree_size = mean(&|m| m.size as f64);
    let mean_breadth = mean(&|m| m.breadth as f64);
    let mean_max_depth = mean(&|m| m.max_depth as f64);
    let deepest = metrics.iter().map(|m| m.per_depth.len()).max().unwrap_or(0);
    let per_depth_means = (0..deepest)
        .map(|d| metrics.iter().map(|m| m.per_depth.get(d).copied().unwrap_or(0) as f64).sum::<f64>() / n as f64)
        .collect();
    let n_games = results
        .iter()
        .filter(|g| g.score_for(model_name).is_some())
        .count();
    ModelSummary {
        model_name: model_name.to_string(),
        n_turns: n,
        n_games,
        winning_rate: winning_rate(model_name, results),
        mean_tree_size,
        mean_breadth,
        mean_max_depth,
        breadth_depth_ratio: match (mean_breadth, mean_max_depth) {
            (Some(b), Some(d)) if d > 0.0 => Some(b / d),
            _ => None,
        },
        per_depth_means,
    }
}

/// Per-sample NLL of `worse` minus that of `better`.
pub fn nll_gap(worse: f64, better: f64) -> f64 {
    worse - better
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquelyCorrect {
    pub myopic_only: usize,
    pub fulltree_only: usize,
    /// Turns on which the two argmax predictions differ.
    pub disagreements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantScore {
    pub variant: ModelVariant,
    pub nll: f64,
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub depth_harm: f64,
    pub candidate_gain: f64,
    pub uniquely_correct: UniquelyCorrect,
    pub variants: Vec<VariantScore>,
}

impl ComparisonReport {
    pub fn score(&self, variant: ModelVariant) -> Option<&VariantScore> {
        self.variants.iter().find(|v| v.variant == variant)
    }
}

fn fit_for(fits: &[FitResult], variant: ModelVariant) -> Result<&FitResult, AnalysisError> {
    fits.iter()
        .find(|f| f.variant == variant)
        .ok_or(AnalysisError::MissingVariant(variant))
}

/// Compares variant fits made on `records`. The full-tree, myopic and
/// no-tree fits are required; a discount fit is reported when present.
pub fn compare_variants(fits: &[FitResult], records: &[TurnRecord]) -> Result<ComparisonReport, AnalysisError> {
    let full = fit_for(fits, ModelVariant::FullTree)?;
    let myopic = fit_for(fits, ModelVariant::Myopic)?;
    let notree = fit_for(fits, ModelVariant::NoTree)?;
    for f in fits {
        if f.n_samples != records.len() {
            return Err(AnalysisError::MismatchedDatasets(format!(
                "{} fit has {} samples, records have {}",
                f.variant,
                f.n_samples,
                records.len()
            )));
        }
    }
    let uniquely_correct = uniquely_correct(records, &full.params, &myopic.params)?;
    let mut variants: Vec<VariantScore> = ModelVariant::ALL
        .iter()
        .filter_map(|&v| fits.iter().find(|f| f.variant == v))
        .map(|f| VariantScore {
            variant: f.variant,
            nll: f.nll_per_sample,
            accuracy: f.accuracy,
            n: f.n_samples,
        })
        .collect();
    variants.dedup_by_key(|v| v.variant);
    Ok(ComparisonReport {
        depth_harm: nll_gap(full.nll_per_sample, myopic.nll_per_sample),
        candidate_gain: nll_gap(notree.nll_per_sample, myopic.nll_per_sample),
        uniquely_correct,
        variants,
    })
}

/// Counts turns where exactly one of the full-tree and myopic argmax
/// predictions matches the chosen move.
pub fn uniquely_correct(
    records: &[TurnRecord],
    full: &HeuristicParams,
    myopic: &HeuristicParams,
) -> Result<UniquelyCorrect, AnalysisError> {
    let full_data = CompiledDataset::new(records, ModelVariant::FullTree)?;
    let myopic_data = CompiledDataset::new(records, ModelVariant::Myopic)?;
    let mut out = UniquelyCorrect {
        myopic_only: 0,
        fulltree_only: 0,
        disagreements: 0,
    };
    for i in 0..records.len() {
        let chosen = full_data.choices[i].candidates[full_data.chosen[i]];
        let p_full = full_data.choices[i].distribution(full, ModelVariant::FullTree).predict_move();
        let p_myopic = myopic_data.choices[i].distribution(myopic, ModelVariant::Myopic).predict_move();
        if p_full == p_myopic {
            continue;
        }
        out.disagreements += 1;
        if p_myopic == chosen {
            out.myopic_only += 1;
        } else if p_full == chosen {
            out.fulltree_only += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedWeights {
    pub w_centre: f64,
    pub w_conn2: f64,
    pub w_unconn2: f64,
    pub w_three: f64,
    pub w_four: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
}

/// Divides every weight by the four-in-a-row weight.
pub fn normalize_weights(params: &HeuristicParams) -> Result<NormalizedWeights, AnalysisError> {
    let w4 = params.w_four();
    if w4 == 0.0 {
        return Err(AnalysisError::ZeroFourWeight);
    }
    Ok(NormalizedWeights {
        w_centre: params.w_centre / w4,
        w_conn2: params.w[0] / w4,
        w_unconn2: params.w[1] / w4,
        w_three: params.w[2] / w4,
        w_four: 1.0,
        c: params.c,
        gamma: params.gamma,
    })
}

/// Groups records by model name, in name order.
pub fn by_model(records: &[TurnRecord]) -> BTreeMap<String, Vec<TurnRecord>> {
    let mut out: BTreeMap<String, Vec<TurnRecord>> = BTreeMap::new();
    for r in records {
        out.entry(r.model_name.clone()).or_default().push(r.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Player;
    use crate::fit::FitOptions;
    use crate::tree::SearchTree;

    fn game(w: &str, b: &str, outcome: Outcome) -> GameResult {
        GameResult {
            game_id: format!("{w}-{b}"),
            white: w.into(),
            black: b.into(),
            outcome,
        }
    }

    #[test]
    fn draws_count_half() {
        let games = vec![
            game("a", "x", Outcome::White),
            game("x", "a", Outcome::Black),
            game("a", "y", Outcome::White),
            game("y", "a", Outcome::White),
            game("a", "y", Outcome::Draw),
            game("x", "y", Outcome::White),
        ];
        assert!((winning_rate("a", &games).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(winning_rate("nobody", &games), None);
    }

    fn record(tree: &str) -> TurnRecord {
        TurnRecord {
            game_id: "g".into(),
            turn_index: 0,
            fen: "9/9/9/9".into(),
            player: Player::White,
            chosen_move: Some(crate::board::Coord::at(2, 4)),
            raw_response: String::new(),
            tree: Some(SearchTree::parse(tree).unwrap()),
            model_name: "m".into(),
        }
    }

    #[test]
    fn summary_of_the_example_tree() {
        let recs = vec![record(r#"{"trees": [["2,4", ["1,3"], ["2,2"]], ["0,3"]]}"#); 3];
        let s = summarize_model("m", &recs, &[]);
        assert_eq!(s.mean_tree_size, Some(4.0));
        assert_eq!(s.mean_breadth, Some(2.0));
        assert_eq!(s.mean_max_depth, Some(2.0));
        assert_eq!(s.breadth_depth_ratio, Some(1.0));
        assert_eq!(s.per_depth_means, vec![2.0, 2.0]);
        assert_eq!(s.winning_rate, None);
        let empty = summarize_model("other", &recs, &[]);
        assert_eq!(empty.n_turns, 0);
        assert_eq!(empty.mean_tree_size, None);
        assert!(empty.per_depth_means.is_empty());
    }

    #[test]
    fn normalisation() {
        let p = HeuristicParams::new(1.0, [2.0, 3.0, 4.0, 8.0], 1.7, 0.0).unwrap();
        let n = normalize_weights(&p).unwrap();
        assert_eq!(
            [n.w_centre, n.w_conn2, n.w_unconn2, n.w_three, n.w_four],
            [0.125, 0.25, 0.375, 0.5, 1.0]
        );
        assert_eq!(n.c, 1.7);
        let zero = HeuristicParams::new(1.0, [2.0, 3.0, 4.0, 0.0], 1.0, 0.0).unwrap();
        assert_eq!(normalize_weights(&zero), Err(AnalysisError::ZeroFourWeight));
    }

    fn fake_fit(variant: ModelVariant, nll: f64, n: usize) -> FitResult {
        FitResult {
            variant,
            params: HeuristicParams::default(),
            nll_per_sample: nll,
            accuracy: 0.5,
            n_samples: n,
            restarts: Vec::new(),
            seed: 0,
            options: FitOptions::default(),
        }
    }

    #[test]
    fn gaps_from_constructed_nlls() {
        let recs = vec![record(r#"{"trees": [["2,4"], ["0,3"]]}"#); 2];
        let fits = vec![
            fake_fit(ModelVariant::FullTree, 0.9, 2),
            fake_fit(ModelVariant::Myopic, 0.7, 2),
            fake_fit(ModelVariant::NoTree, 1.5, 2),
        ];
        let r = compare_variants(&fits, &recs).unwrap();
        assert!((r.depth_harm - 0.2).abs() < 1e-12);
        assert!((r.candidate_gain - 0.8).abs() < 1e-12);
        // Identical parameters give identical depth-1 predictions.
        assert_eq!(r.uniquely_correct.disagreements, 0);
        assert_eq!(r.variants.len(), 3);

        let short = vec![recs[0].clone()];
        assert!(matches!(compare_variants(&fits, &short), Err(AnalysisError::MismatchedDatasets(_))));
        assert_eq!(
            compare_variants(&fits[..2], &recs),
            Err(AnalysisError::MissingVariant(ModelVariant::NoTree))
        );
    }
}
