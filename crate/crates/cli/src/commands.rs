use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::{json, Value};

use fiar_core::analysis::{
    compare_variants, normalize_weights, regress, summarize_model, write_report, ComparisonReport, GameResult,
    ModelSummary, RegressOptions, ReportTables,
};
use fiar_core::board::BoardState;
use fiar_core::fit::{exclusion_reason, filter_dataset, fit_model, read_records, write_records, FitResult, TurnRecord};
use fiar_core::harness::{
    dominant_four_params, read_game_logs, run_game, run_tournament, schedule, system_prompt, turn_records,
    user_prompt, Agent, AgentKind, GameLog, GameOptions,
};
use fiar_core::heuristic::HeuristicParams;
use fiar_core::intervene::{apply_strategy, parse_labels, EditStrategy};
use fiar_core::policy::ModelVariant;
use fiar_core::recovery::{default_generator_params, random_stimuli, recovery_test, StimulusConfig};

use crate::config::RunConfig;
use crate::{data, CliError, Command, Common, FitArgs};

pub fn dispatch(command: Command, cfg: &mut RunConfig) -> Result<(), CliError> {
    match command {
        Command::Play {
            white,
            black,
            game_id,
            retry,
            common,
        } => {
            apply_common(cfg, &common);
            cfg.tournament.retry_invalid |= retry;
            play(cfg, &white, &black, &game_id)
        }
        Command::Tournament {
            agents,
            games_per_pair,
            dry_run,
            retry,
            common,
        } => {
            apply_common(cfg, &common);
            apply_tournament(cfg, agents, games_per_pair);
            cfg.tournament.retry_invalid |= retry;
            tournament(cfg, dry_run).map(|_| ())
        }
        Command::ValidateTrees { dataset, report } => validate_trees(&dataset_path(cfg, dataset)?, report.as_deref()),
        Command::Metrics { dataset, games, common } => {
            apply_common(cfg, &common);
            metrics(cfg, &dataset_path(cfg, dataset.clone())?, games.as_deref())
        }
        Command::Fit {
            variant,
            dataset,
            model,
            fit,
            common,
        } => {
            apply_common(cfg, &common);
            apply_fit(cfg, &fit);
            let variant: ModelVariant = variant.parse().map_err(CliError::Usage)?;
            fit_command(cfg, &dataset_path(cfg, dataset)?, variant, model.as_deref())
        }
        Command::Compare {
            dataset,
            games,
            fit,
            common,
        } => {
            apply_common(cfg, &common);
            apply_fit(cfg, &fit);
            let records = load_records(&dataset_path(cfg, dataset)?)?;
            let results = match games {
                Some(p) => load_logs(&p)?.iter().map(GameLog::game_result).collect(),
                None => Vec::new(),
            };
            compare(cfg, &records, &results, &cfg.output.clone()).map(|_| ())
        }
        Command::Recover { dataset, n, fit, common } => {
            apply_common(cfg, &common);
            apply_fit(cfg, &fit);
            if let Some(n) = n {
                cfg.recovery.n = n;
            }
            recover(cfg, dataset.or_else(|| cfg.dataset.clone()).as_deref())
        }
        Command::Regress {
            table,
            y,
            x,
            weights,
            permutations,
            common,
        } => {
            apply_common(cfg, &common);
            if let Some(p) = permutations {
                cfg.analysis.permutations = p;
            }
            regress_command(cfg, &table, &y, &x, weights.as_deref(), common.out.is_some())
        }
        Command::Prune {
            trace,
            labels,
            strategies,
            bundle,
        } => prune(&trace, &labels, &strategies, bundle.as_deref()),
        Command::Report {
            agents,
            games_per_pair,
            fit,
            common,
        } => {
            apply_common(cfg, &common);
            apply_fit(cfg, &fit);
            apply_tournament(cfg, agents, games_per_pair);
            report(cfg)
        }
        Command::Prompt { fen } => {
            let state = BoardState::parse_fen(&fen).map_err(data("--fen"))?;
            println!("{}\n\n---\n\n{}", system_prompt(state.to_move()), user_prompt(&state));
            Ok(())
        }
    }
}

fn apply_common(cfg: &mut RunConfig, common: &Common) {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
}

fn apply_fit(cfg: &mut RunConfig, fit: &FitArgs) {
    if let Some(r) = fit.restarts {
        cfg.fit.restarts = r;
    }
}

fn apply_tournament(cfg: &mut RunConfig, agents: Option<Vec<String>>, games_per_pair: Option<usize>) {
    if let Some(a) = agents {
        cfg.tournament.agents = a;
    }
    if let Some(g) = games_per_pair {
        cfg.tournament.games_per_pair = g;
    }
}

fn dataset_path(cfg: &RunConfig, given: Option<PathBuf>) -> Result<PathBuf, CliError> {
    given
        .or_else(|| cfg.dataset.clone())
        .ok_or_else(|| CliError::Usage("no dataset given (use --dataset or set `dataset` in the config)".into()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(data(parent.display()))?;
    }
    fs::write(path, contents).map_err(data(path.display()))
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serialisable") + "\n"
}

fn load_records(path: &Path) -> Result<Vec<TurnRecord>, CliError> {
    let file = fs::File::open(path).map_err(data(path.display()))?;
    read_records(BufReader::new(file)).map_err(data(path.display()))
}

fn load_logs(path: &Path) -> Result<Vec<GameLog>, CliError> {
    let file = fs::File::open(path).map_err(data(path.display()))?;
    read_game_logs(BufReader::new(file)).map_err(data(path.display()))
}

fn load_params(path: &str) -> Result<HeuristicParams, CliError> {
    let text = fs::read_to_string(path).map_err(data(path))?;
    HeuristicParams::from_kv(&text).map_err(data(path))
}

/// Reads `[name=]kind[:argument]`.
pub fn parse_agent(spec: &str, cfg: &RunConfig) -> Result<Agent, CliError> {
    let (name, body) = match spec.split_once('=') {
        Some((n, b)) if !n.contains(':') => (Some(n.trim()), b.trim()),
        _ => (None, spec.trim()),
    };
    let (kind, arg) = match body.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (body, None),
    };
    let usage = |m: String| CliError::Usage(format!("agent `{spec}`: {m}"));
    let agent_kind = match (kind, arg) {
        ("random", None) => AgentKind::RandomBot,
        ("myopic", None) => AgentKind::MyopicBot(dominant_four_params()),
        ("myopic", Some(file)) => AgentKind::MyopicBot(load_params(file)?),
        ("full-tree", d) => AgentKind::FullTreeBot {
            params: dominant_four_params(),
            depth_limit: match d {
                Some(d) => d.parse().map_err(|_| usage(format!("bad depth `{d}`")))?,
                None => cfg.tournament.full_tree_depth,
            },
        },
        ("external", Some(cmd)) => {
            let words: Vec<String> = cmd.split_whitespace().map(String::from).collect();
            if words.is_empty() {
                return Err(usage("empty command".into()));
            }
            AgentKind::ExternalProcess(words)
        }
        _ => return Err(usage("expected random, myopic[:params], full-tree[:depth] or external:<command>".into())),
    };
    Ok(Agent::new(name.unwrap_or(kind), agent_kind))
}

fn game_options(cfg: &RunConfig) -> GameOptions {
    GameOptions {
        retry_invalid: cfg.tournament.retry_invalid,
        move_timeout: Duration::from_secs(cfg.tournament.move_timeout_secs),
        ..GameOptions::default()
    }
}

fn play(cfg: &RunConfig, white: &str, black: &str, game_id: &str) -> Result<(), CliError> {
    let w = parse_agent(white, cfg)?;
    let b = parse_agent(black, cfg)?;
    let log = run_game(&w, &b, game_id, cfg.task_seed(&format!("play/{game_id}")), &game_options(cfg))
        .map_err(data("game"))?;
    let path = cfg.output.join(format!("{game_id}.jsonl"));
    write(&path, log.to_text())?;
    eprintln!("{game_id}: {:?} ({} turns) -> {}", log.result, log.turns.len(), path.display());
    Ok(())
}

fn tournament(cfg: &RunConfig, dry_run: bool) -> Result<Vec<GameLog>, CliError> {
    let agents = cfg
        .tournament
        .agents
        .iter()
        .map(|s| parse_agent(s, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    if dry_run {
        let plan = schedule(agents.len(), cfg.tournament.games_per_pair);
        for g in &plan {
            println!("{}\t{}\t{}", g.game_id, agents[g.white].name, agents[g.black].name);
        }
        println!("total\t{}", plan.len());
        return Ok(Vec::new());
    }
    let t = run_tournament(
        &agents,
        cfg.tournament.games_per_pair,
        cfg.task_seed("tournament"),
        &game_options(cfg),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let games_dir = cfg.output.join("games");
    let mut merged = String::new();
    for g in &t.games {
        let text = g.to_text();
        write(&games_dir.join(format!("{}.jsonl", g.game_id)), &text)?;
        merged.push_str(&text);
    }
    write(&cfg.output.join("games.jsonl"), merged)?;
    let mut standings = csv::Writer::from_writer(Vec::new());
    for s in &t.standings {
        standings.serialize(s).map_err(data("standings"))?;
    }
    write(
        &cfg.output.join("standings.csv"),
        standings.into_inner().map_err(data("standings"))?,
    )?;
    for f in &t.failures {
        eprintln!("warning: {} failed: {}", f.game_id, f.message);
    }
    for s in &t.standings {
        eprintln!(
            "{:<12} played {:>3}  W {:>3}  D {:>3}  L {:>3}  points {:>5.1}",
            s.name, s.played, s.wins, s.draws, s.losses, s.points
        );
    }
    Ok(t.games)
}

fn validation_report(lines: &str) -> Value {
    let mut candidates = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut n = 0;
    for (i, line) in lines.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        n += 1;
        let mut push = |reason: String, detail: Value, id: Value| {
            *counts.entry(reason.clone()).or_insert(0) += 1;
            candidates.push(json!({"line": i + 1, "record": id, "reason": reason, "detail": detail}));
        };
        let record = match TurnRecord::from_json(line) {
            Ok(r) => r,
            Err(e) => {
                push("malformed-record".into(), json!(e.to_string()), Value::Null);
                continue;
            }
        };
        let id = json!({"game_id": record.game_id, "turn_index": record.turn_index, "model_name": record.model_name});
        let tree_error = TurnRecord::tree_diagnostic(line).ok().flatten();
        let issues = match (BoardState::parse_fen_with_player(&record.fen, record.player), &record.tree) {
            (Ok(state), Some(tree)) => tree
                .validate_against_board(&state)
                .issues
                .iter()
                .map(|iss| {
                    json!({
                        "path": iss.path.iter().map(|c| c.to_pair()).collect::<Vec<_>>(),
                        "depth": iss.depth,
                        "kind": format!("{:?}", iss.kind),
                    })
                })
                .collect(),
            _ => Vec::new(),
        };
        if let Some(reason) = exclusion_reason(&record) {
            let detail = json!({
                "tree_error": tree_error.map(|e| e.to_string()),
                "tree_issues": issues,
            });
            push(reason.to_string(), detail, id);
        } else if !issues.is_empty() {
            // Kept for fitting; illegal nodes are truncated.
            push("illegal-nodes".into(), json!({"tree_issues": issues}), id);
        }
    }
    json!({"records": n, "exclusion_candidates": candidates, "counts": counts})
}

fn validate_trees(dataset: &Path, report: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(dataset).map_err(data(dataset.display()))?;
    let value = validation_report(&text);
    let out = pretty(&value);
    match report {
        Some(p) => write(p, out)?,
        None => print!("{out}"),
    }
    eprintln!(
        "{} records, {} exclusion candidates",
        value["records"],
        value["exclusion_candidates"].as_array().map_or(0, Vec::len)
    );
    Ok(())
}

fn summaries(records: &[TurnRecord], results: &[GameResult]) -> Vec<ModelSummary> {
    let mut names: Vec<&str> = records.iter().map(|r| r.model_name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    names.iter().map(|m| summarize_model(m, records, results)).collect()
}

fn metrics(cfg: &RunConfig, dataset: &Path, games: Option<&Path>) -> Result<(), CliError> {
    let records = load_records(dataset)?;
    let results: Vec<GameResult> = match games {
        Some(p) => load_logs(p)?.iter().map(GameLog::game_result).collect(),
        None => Vec::new(),
    };
    let kept = filter_dataset(&records).kept;
    let sums = summaries(&kept, &results);
    write(&cfg.output.join("metrics.json"), pretty(&sums))?;
    let tables = ReportTables {
        models: sums.into_iter().map(|s| (s, None, None)).collect(),
    };
    write_report(&cfg.output.join("analysis"), &tables).map_err(data("analysis tables"))?;
    eprintln!("metrics for {} models -> {}", tables.models.len(), cfg.output.display());
    Ok(())
}

/// Models with enough usable turns, and their turns.
fn fittable(records: &[TurnRecord], only: Option<&str>) -> Result<Vec<(String, Vec<TurnRecord>)>, CliError> {
    let filtered = filter_dataset(records);
    let mut out = Vec::new();
    for (model, ok) in &filtered.model_ok {
        if only.is_some_and(|m| m != model) {
            continue;
        }
        if *ok {
            out.push((model.clone(), filtered.kept_for(model)));
        } else {
            eprintln!("skipping {model}: too few usable turns");
        }
    }
    if out.is_empty() {
        return Err(CliError::Data("no model has enough usable turns to fit".into()));
    }
    Ok(out)
}

fn fit_one(cfg: &RunConfig, model: &str, records: &[TurnRecord], variant: ModelVariant) -> Result<FitResult, CliError> {
    let options = cfg.fit_options(&format!("fit/{model}/{variant}"));
    fit_model(records, variant, &options).map_err(data(format!("{model} {variant}")))
}

fn save_fit(dir: &Path, model: &str, fit: &FitResult) -> Result<(), CliError> {
    let stem = format!("{}-{}", sanitize(model), fit.variant);
    write(&dir.join(format!("{stem}.txt")), format!("model = {model}\n{}", fit.to_kv()))?;
    write(&dir.join(format!("{stem}.json")), pretty(fit))
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn fit_command(cfg: &RunConfig, dataset: &Path, variant: ModelVariant, only: Option<&str>) -> Result<(), CliError> {
    let records = load_records(dataset)?;
    for (model, recs) in fittable(&records, only)? {
        let fit = fit_one(cfg, &model, &recs, variant)?;
        save_fit(&cfg.output.join("fits"), &model, &fit)?;
        eprintln!(
            "{model} {variant}: nll/sample {:.6}, accuracy {:.3}, n {}",
            fit.nll_per_sample, fit.accuracy, fit.n_samples
        );
    }
    Ok(())
}

fn compare(
    cfg: &RunConfig,
    records: &[TurnRecord],
    results: &[GameResult],
    out: &Path,
) -> Result<ReportTables, CliError> {
    let mut comparisons: BTreeMap<String, (ComparisonReport, HeuristicParams)> = BTreeMap::new();
    for (model, recs) in fittable(records, None)? {
        let mut fits = Vec::new();
        for variant in ModelVariant::ALL {
            let fit = fit_one(cfg, &model, &recs, variant)?;
            save_fit(&out.join("fits"), &model, &fit)?;
            fits.push(fit);
        }
        let report = compare_variants(&fits, &recs).map_err(data(&model))?;
        eprintln!(
            "{model}: depth harm {:+.4}, candidate gain {:+.4}, uniquely correct myopic {} / full-tree {}",
            report.depth_harm,
            report.candidate_gain,
            report.uniquely_correct.myopic_only,
            report.uniquely_correct.fulltree_only
        );
        let myopic = fits.iter().find(|f| f.variant == ModelVariant::Myopic).expect("fitted").params;
        comparisons.insert(model, (report, myopic));
    }
    let kept = filter_dataset(records).kept;
    let tables = ReportTables {
        models: summaries(&kept, results)
            .into_iter()
            .map(|s| {
                let entry = comparisons.get(&s.model_name);
                let cmp = entry.map(|(c, _)| c.clone());
                let weights = entry.and_then(|(_, p)| normalize_weights(p).ok());
                (s, cmp, weights)
            })
            .collect(),
    };
    let json_cmp: BTreeMap<&String, &ComparisonReport> = comparisons.iter().map(|(k, (c, _))| (k, c)).collect();
    write(&out.join("comparisons.json"), pretty(&json_cmp))?;
    write_report(&out.join("analysis"), &tables).map_err(data("analysis tables"))?;
    Ok(tables)
}

fn recover(cfg: &RunConfig, dataset: Option<&Path>) -> Result<(), CliError> {
    let mut lines = String::new();
    let mut push = |model: &str, (full, myopic): (fiar_core::recovery::RecoveryOutcome, fiar_core::recovery::RecoveryOutcome)| {
        for (condition, o) in [("full-tree", &full), ("myopic", &myopic)] {
            let v = json!({
                "model_name": model,
                "condition": condition,
                "delta": o.delta,
                "recovered": o.recovered,
                "n": o.n,
                "seed": o.seed,
            });
            lines.push_str(&v.to_string());
            lines.push('\n');
            eprintln!("{model} {condition}: delta {:+.4} recovered {}", o.delta, o.recovered);
        }
    };
    match dataset {
        Some(path) => {
            let records = load_records(path)?;
            for (model, recs) in fittable(&records, None)? {
                let full = fit_one(cfg, &model, &recs, ModelVariant::FullTree)?.params;
                let myopic = fit_one(cfg, &model, &recs, ModelVariant::Myopic)?.params;
                let seed = cfg.task_seed(&format!("recover/{model}"));
                let options = cfg.fit_options(&format!("recover/{model}/fit"));
                let outcome = recovery_test(&recs, &full, &myopic, seed, &options).map_err(data(&model))?;
                push(&model, outcome);
            }
        }
        None => {
            let stimuli = random_stimuli(cfg.recovery.n, cfg.task_seed("recover/stimuli"), &StimulusConfig::default());
            let p = default_generator_params();
            let seed = cfg.task_seed("recover/synthetic");
            let options = cfg.fit_options("recover/synthetic/fit");
            let outcome = recovery_test(&stimuli, &p, &p, seed, &options).map_err(data("synthetic"))?;
            push("synthetic", outcome);
        }
    }
    write(&cfg.output.join("recovery.jsonl"), lines)
}

fn regress_command(
    cfg: &RunConfig,
    table: &Path,
    y: &str,
    xs: &[String],
    weights: Option<&str>,
    to_file: bool,
) -> Result<(), CliError> {
    let mut reader = csv::Reader::from_path(table).map_err(data(table.display()))?;
    let headers = reader.headers().map_err(data(table.display()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("column `{name}` not in {}", table.display())))
    };
    let y_idx = col(y)?;
    let x_idx = xs.iter().map(|x| col(x)).collect::<Result<Vec<_>, _>>()?;
    let w_idx = weights.map(col).transpose()?;
    let mut yv = Vec::new();
    let mut xv: Vec<Vec<f64>> = vec![Vec::new(); xs.len()];
    let mut wv = Vec::new();
    for row in reader.records() {
        let row = row.map_err(data(table.display()))?;
        let get = |i: usize| row.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        let mut needed = vec![y_idx];
        needed.extend(&x_idx);
        needed.extend(w_idx);
        // Rows with a missing value are skipped.
        if needed.iter().any(|&i| get(i).is_none()) {
            continue;
        }
        yv.push(get(y_idx).expect("checked"));
        for (k, &i) in x_idx.iter().enumerate() {
            xv[k].push(get(i).expect("checked"));
        }
        if let Some(i) = w_idx {
            wv.push(get(i).expect("checked"));
        }
    }
    let predictors: Vec<(&str, &[f64])> = xs.iter().map(String::as_str).zip(xv.iter().map(Vec::as_slice)).collect();
    let options = RegressOptions {
        n_permutations: cfg.analysis.permutations,
        seed: cfg.task_seed(&format!("regress/{y}")),
        weights: w_idx.map(|_| wv),
    };
    let result = regress(&yv, &predictors, &options).map_err(data("regression"))?;
    for (i, name) in result.names.iter().enumerate() {
        let p = result.p_values[i].map_or("-".to_string(), |p| format!("{p:.4}"));
        eprintln!("{name:<24} beta {:>12.6}  p {p}", result.coefficients[i]);
    }
    if to_file {
        write(&cfg.output.join(format!("regress-{}.json", sanitize(y))), pretty(&result))
    } else {
        print!("{}", pretty(&result));
        Ok(())
    }
}

fn prune(trace: &Path, labels: &Path, strategies: &[String], bundle: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(trace).map_err(data(trace.display()))?;
    let label_text = fs::read_to_string(labels).map_err(data(labels.display()))?;
    let labels = parse_labels(&label_text).map_err(data(labels.display()))?;
    let mut out = Vec::new();
    for s in strategies {
        let strategy: EditStrategy = s.parse().map_err(CliError::Usage)?;
        let edit = apply_strategy(&text, &labels, strategy).map_err(data(s))?;
        eprintln!(
            "{strategy}: removed paragraphs {:?}, fraction {:.3}{}",
            edit.removed_paragraphs,
            edit.removal_fraction,
            if edit.rejected { " (rejected)" } else { "" }
        );
        out.push(edit);
    }
    match bundle {
        Some(p) => write(p, pretty(&out)),
        None => {
            print!("{}", pretty(&out));
            Ok(())
        }
    }
}

fn report(cfg: &RunConfig) -> Result<(), CliError> {
    let out = cfg.output.clone();
    write(&out.join("config.toml"), cfg.to_toml())?;
    let games = tournament(cfg, false)?;
    let records = turn_records(&games);
    let mut buf = Vec::new();
    write_records(&mut buf, &records).map_err(data("dataset"))?;
    write(&out.join("validation.json"), pretty(&validation_report(&String::from_utf8_lossy(&buf))))?;
    write(&out.join("dataset.jsonl"), buf)?;

    let results: Vec<GameResult> = games.iter().map(GameLog::game_result).collect();
    let tables = compare(cfg, &records, &results, &out)?;
    write(
        &out.join("metrics.json"),
        pretty(&tables.models.iter().map(|(s, _, _)| s).collect::<Vec<_>>()),
    )?;

    // Winning rate against breadth and depth across models, when identifiable.
    let rows: Vec<&ModelSummary> = tables
        .models
        .iter()
        .map(|(s, _, _)| s)
        .filter(|s| s.winning_rate.is_some() && s.mean_breadth.is_some() && s.mean_max_depth.is_some())
        .collect();
    let y: Vec<f64> = rows.iter().map(|s| s.winning_rate.expect("filtered")).collect();
    let b: Vec<f64> = rows.iter().map(|s| s.mean_breadth.expect("filtered")).collect();
    let d: Vec<f64> = rows.iter().map(|s| s.mean_max_depth.expect("filtered")).collect();
    let options = RegressOptions {
        n_permutations: cfg.analysis.permutations,
        seed: cfg.task_seed("report/regress"),
        weights: cfg.analysis.weighted.then(|| rows.iter().map(|s| s.n_turns as f64).collect()),
    };
    let regression = match regress(&y, &[("mean_breadth", &b), ("mean_max_depth", &d)], &options) {
        Ok(r) => json!({"status": "ok", "result": r}),
        Err(e) => json!({"status": "skipped", "reason": e.to_string()}),
    };
    write(&out.join("regression.json"), pretty(&regression))?;
    eprintln!(
        "report: {} games, {} turns, {} models -> {}",
        games.len(),
        records.len(),
        tables.models.len(),
        out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agent_specs() {
        let cfg = RunConfig::default();
        assert_eq!(parse_agent("random", &cfg).unwrap().name, "random");
        let a = parse_agent("deep=full-tree:2", &cfg).unwrap();
        assert_eq!(a.name, "deep");
        assert!(matches!(a.kind, AgentKind::FullTreeBot { depth_limit: 2, .. }));
        let e = parse_agent("external:python3 -u bot.py", &cfg).unwrap();
        assert_eq!(e.kind, AgentKind::ExternalProcess(vec!["python3".into(), "-u".into(), "bot.py".into()]));
        assert!(parse_agent("oracle", &cfg).is_err());
        let p = parse_agent("myopic", &cfg).unwrap();
        assert_eq!(p.kind, AgentKind::MyopicBot(dominant_four_params()));
    }
}
