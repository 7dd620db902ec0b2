//! Tidy CSV tables and plot-description files.
//!
//! `models.csv` has one row per model, `variants.csv` one row per
//! (model, variant) and `per_depth.csv` one row per (model, depth). Each
//! figure file names a table and the columns on its axes.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ComparisonReport, ModelSummary, NormalizedWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub model_name: String,
    pub n_turns: usize,
    pub n_games: usize,
    pub winning_rate: Option<f64>,
    pub mean_tree_size: Option<f64>,
    pub mean_breadth: Option<f64>,
    pub mean_max_depth: Option<f64>,
    pub breadth_depth_ratio: Option<f64>,
    pub depth_harm: Option<f64>,
    pub candidate_gain: Option<f64>,
    pub myopic_only: Option<usize>,
    pub fulltree_only: Option<usize>,
    pub norm_w_centre: Option<f64>,
    pub norm_w_conn2: Option<f64>,
    pub norm_w_unconn2: Option<f64>,
    pub norm_w_three: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VariantRow {
    model_name: String,
    variant: String,
    nll: f64,
    accuracy: f64,
    n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DepthRow {
    model_name: String,
    depth: usize,
    mean_nodes: f64,
}

/// Everything known about one model; comparison and weights are absent
/// for models that were not fitted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTables {
    pub models: Vec<(ModelSummary, Option<ComparisonReport>, Option<NormalizedWeights>)>,
}

pub fn model_rows(tables: &ReportTables) -> Vec<ModelRow> {
    tables
        .models
        .iter()
        .map(|(s, cmp, w)| ModelRow {
            model_name: s.model_name.clone(),
            n_turns: s.n_turns,
            n_games: s.n_games,
            winning_rate: s.winning_rate,
            mean_tree_size: s.mean_tree_size,
            mean_breadth: s.mean_breadth,
            mean_max_depth: s.mean_max_depth,
            breadth_depth_ratio: s.breadth_depth_ratio,
            depth_harm: cmp.as_ref().map(|c| c.depth_harm),
            candidate_gain: cmp.as_ref().map(|c| c.candidate_gain),
            myopic_only: cmp.as_ref().map(|c| c.uniquely_correct.myopic_only),
            fulltree_only: cmp.as_ref().map(|c| c.uniquely_correct.fulltree_only),
            norm_w_centre: w.map(|w| w.w_centre),
            norm_w_conn2: w.map(|w| w.w_conn2),
            norm_w_unconn2: w.map(|w| w.w_unconn2),
            norm_w_three: w.map(|w| w.w_three),
            c: w.map(|w| w.c),
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> io::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        writer.write_record(header)?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const MODEL_HEADER: &[&str] = &[
    "model_name",
    "n_turns",
    "n_games",
    "winning_rate",
    "mean_tree_size",
    "mean_breadth",
    "mean_max_depth",
    "breadth_depth_ratio",
    "depth_harm",
    "candidate_gain",
    "myopic_only",
    "fulltree_only",
    "norm_w_centre",
    "norm_w_conn2",
    "norm_w_unconn2",
    "norm_w_three",
    "C",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub column: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub id: String,
    pub title: String,
    pub kind: String,
    pub table: String,
    pub x: Axis,
    pub y: Vec<Axis>,
    /// Column that distinguishes series or labels points.
    pub group: Option<String>,
}

fn axis(column: &str, label: &str) -> Axis {
    Axis {
        column: column.into(),
        label: label.into(),
    }
}

fn figure(id: &str, title: &str, kind: &str, table: &str, x: Axis, y: Vec<Axis>, group: &str) -> FigureSpec {
    FigureSpec {
        id: id.into(),
        title: title.into(),
        kind: kind.into(),
        table: table.into(),
        x,
        y,
        group: Some(group.into()),
    }
}

pub fn figure_specs() -> Vec<FigureSpec> {
    let m = "models.csv";
    vec![
        figure("winrate-vs-size", "Winning rate against mean tree size", "scatter", m,
            axis("mean_tree_size", "Mean tree size (nodes)"), vec![axis("winning_rate", "Winning rate")], "model_name"),
        figure("breadth-vs-depth", "Mean breadth against mean maximum depth", "scatter", m,
            axis("mean_max_depth", "Mean maximum depth (plies)"), vec![axis("mean_breadth", "Mean breadth")], "model_name"),
        figure("winrate-vs-ratio", "Winning rate against breadth-to-depth ratio", "scatter", m,
            axis("breadth_depth_ratio", "Breadth / depth"), vec![axis("winning_rate", "Winning rate")], "model_name"),
        figure("variant-nll", "Per-sample NLL by model variant", "grouped-bar", "variants.csv",
            axis("variant", "Model variant"), vec![axis("nll", "NLL per sample")], "model_name"),
        figure("variant-accuracy", "Prediction accuracy by model variant", "grouped-bar", "variants.csv",
            axis("variant", "Model variant"), vec![axis("accuracy", "Accuracy")], "model_name"),
        figure("depth-harm-vs-depth", "Depth harm against mean maximum depth", "scatter", m,
            axis("mean_max_depth", "Mean maximum depth (plies)"), vec![axis("depth_harm", "NLL full-tree minus myopic")], "model_name"),
        figure("candidate-gain-vs-breadth", "Candidate gain against mean breadth", "scatter", m,
            axis("mean_breadth", "Mean breadth"), vec![axis("candidate_gain", "NLL no-tree minus myopic")], "model_name"),
        figure("weights-vs-winrate", "Normalised myopic weights against winning rate", "scatter-panels", m,
            axis("winning_rate", "Winning rate"),
            vec![
                axis("norm_w_centre", "Centre / four"),
                axis("norm_w_conn2", "Connected two / four"),
                axis("norm_w_unconn2", "Unconnected two / four"),
                axis("norm_w_three", "Three / four"),
                axis("C", "Offensive scale C"),
            ],
            "model_name"),
        figure("nodes-per-depth", "Mean nodes per depth", "grouped-bar", "per_depth.csv",
            axis("depth", "Depth"), vec![axis("mean_nodes", "Mean nodes")], "model_name"),
    ]
}

/// Writes the three tables and one `figures/<id>.json` per figure.
pub fn write_report(dir: &Path, tables: &ReportTables) -> io::Result<()> {
    fs::create_dir_all(dir.join("figures"))?;
    fs::write(dir.join("models.csv"), to_csv(&model_rows(tables), MODEL_HEADER)?)?;

    let mut variants = Vec::new();
    let mut depths = Vec::new();
    for (s, cmp, _) in &tables.models {
        for v in cmp.iter().flat_map(|c| &c.variants) {
            variants.push(VariantRow {
                model_name: s.model_name.clone(),
                variant: v.variant.to_string(),
                nll: v.nll,
                accuracy: v.accuracy,
                n: v.n,
            });
        }
        for (d, &mean_nodes) in s.per_depth_means.iter().enumerate() {
            depths.push(DepthRow {
                model_name: s.model_name.clone(),
                depth: d + 1,
                mean_nodes,
            });
        }
    }
    fs::write(
        dir.join("variants.csv"),
        to_csv(&variants, &["model_name", "variant", "nll", "accuracy", "n"])?,
    )?;
    fs::write(
        dir.join("per_depth.csv"),
        to_csv(&depths, &["model_name", "depth", "mean_nodes"])?,
    )?;
    for spec in figure_specs() {
        let text = serde_json::to_string_pretty(&spec).map_err(io::Error::other)?;
        fs::write(dir.join("figures").join(format!("{}.json", spec.id)), text + "\n")?;
    }
    Ok(())
}
