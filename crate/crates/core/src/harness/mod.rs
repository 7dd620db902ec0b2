//! Games between agents, game logs and round-robin tournaments.

mod agents;
mod external;
mod prompt;

pub use agents::{full_tree_move, myopic_move, random_move};
pub use external::ExternalAgent;
pub use prompt::{system_prompt, user_prompt};

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::sync::OnceLock;
use std::time::Duration;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::analysis::{winning_rate, GameResult};
use crate::board::{BoardState, Coord, Outcome, Player, COLS, ROWS};
use crate::fit::{RecordError, TurnRecord};
use crate::heuristic::HeuristicParams;
use crate::seed::derive_seed;
use crate::tree::SearchTree;

pub const DEFAULT_GAMES_PER_PAIR: usize = 4;
pub const DEFAULT_FULL_TREE_DEPTH: usize = 3;
pub const MAX_RETRIES: usize = 3;
pub const DEFAULT_MOVE_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("no <next_move> tag in the response")]
    NoMoveTag,
    #[error("cannot read `{0}` as `m <row> <col>`")]
    BadMoveSyntax(String),
    #[error("square {row},{col} is off the board")]
    OffBoard { row: usize, col: usize },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot start agent: {0}")]
    Spawn(String),
    #[error("a tournament needs at least two agents")]
    TooFewAgents,
    #[error("agent name `{0}` is used twice")]
    DuplicateAgent(String),
    #[error("replay log has no turn for {fen}")]
    ReplayExhausted { fen: String },
    #[error("malformed game log: {0}")]
    MalformedLog(String),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn tag_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<next_move>(.*?)</next_move>").expect("valid pattern"))
}

fn move_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^m\s+(\d+)\s+(\d+)$").expect("valid pattern"))
}

/// Extracts the move in the last `<next_move>` tag and the text before it.
pub fn parse_agent_response(text: &str) -> Result<(Coord, String), ResponseError> {
    let last = tag_pattern().captures_iter(text).last().ok_or(ResponseError::NoMoveTag)?;
    let whole = last.get(0).expect("match");
    let inner = last[1].trim();
    let caps = move_pattern()
        .captures(inner)
        .ok_or_else(|| ResponseError::BadMoveSyntax(inner.to_string()))?;
    let parse = |i: usize| caps[i].parse::<usize>().map_err(|_| ResponseError::BadMoveSyntax(inner.to_string()));
    let (row, col) = (parse(1)?, parse(2)?);
    if row >= ROWS || col >= COLS {
        return Err(ResponseError::OffBoard { row, col });
    }
    Ok((Coord::at(row, col), text[..whole.start()].to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum AgentKind {
    RandomBot,
    MyopicBot(HeuristicParams),
    FullTreeBot { params: HeuristicParams, depth_limit: usize },
    /// Plays back the responses stored for one side of a game.
    Replay(GameLog),
    ExternalProcess(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub name: String,
    pub kind: AgentKind,
}

/// Weights under which the myopic bot always takes an available win.
pub fn dominant_four_params() -> HeuristicParams {
    HeuristicParams::new(0.2, [0.5, 0.25, 2.0, 1000.0], 1.0, 0.0).expect("valid")
}

impl Agent {
    pub fn new(name: impl Into<String>, kind: AgentKind) -> Agent {
        Agent { name: name.into(), kind }
    }

    pub fn random() -> Agent {
        Agent::new("random", AgentKind::RandomBot)
    }

    pub fn myopic(params: HeuristicParams) -> Agent {
        Agent::new("myopic", AgentKind::MyopicBot(params))
    }

    pub fn full_tree(params: HeuristicParams, depth_limit: usize) -> Agent {
        Agent::new("full-tree", AgentKind::FullTreeBot { params, depth_limit })
    }

    /// Replays the side of `log` that played `side`, under its logged name.
    pub fn replay(log: &GameLog, side: Player) -> Agent {
        let name = match side {
            Player::White => log.white.clone(),
            Player::Black => log.black.clone(),
        };
        Agent::new(name, AgentKind::Replay(log.clone()))
    }

    fn start(&self, timeout: Duration) -> Result<Session<'_>, HarnessError> {
        Ok(match &self.kind {
            AgentKind::ExternalProcess(cmd) => Session::External(Box::new(ExternalAgent::spawn(cmd, timeout)?)),
            _ => Session::Builtin(self),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentResponse {
    pub text: String,
    /// Candidate tree when the agent reports one directly.
    pub tree: Option<SearchTree>,
}

enum Session<'a> {
    Builtin(&'a Agent),
    External(Box<ExternalAgent>),
}

impl Session<'_> {
    fn respond(&mut self, state: &BoardState, turn: usize, seed: u64) -> Result<AgentResponse, String> {
        let agent = match self {
            Session::External(ext) => {
                return ext.ask(state).map(|text| AgentResponse { text, tree: None });
            }
            Session::Builtin(agent) => agent,
        };
        Ok(match &agent.kind {
            AgentKind::RandomBot => random_move(state, seed),
            AgentKind::MyopicBot(p) => myopic_move(state, p, seed),
            AgentKind::FullTreeBot { params, depth_limit } => full_tree_move(state, params, *depth_limit, seed),
            AgentKind::Replay(log) => {
                let fen = state.to_fen();
                let t = log
                    .turns
                    .iter()
                    .find(|t| t.turn_index as usize == turn && t.fen == fen)
                    .ok_or_else(|| HarnessError::ReplayExhausted { fen }.to_string())?;
                AgentResponse {
                    text: t.raw_response.clone(),
                    tree: t.tree.clone(),
                }
            }
            AgentKind::ExternalProcess(_) => unreachable!("external agents run in their own session"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForfeitReason {
    /// The response could not be obtained or did not contain a readable move.
    Protocol { message: String },
    /// The move was off the board or onto an occupied square.
    IllegalMove { message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forfeit {
    pub player: Player,
    pub reason: ForfeitReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub game_id: String,
    pub white: String,
    pub black: String,
    pub turns: Vec<TurnRecord>,
    pub result: Outcome,
    pub forfeit: Option<Forfeit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResultLine {
    game_id: String,
    white: String,
    black: String,
    result: Outcome,
    #[serde(default)]
    forfeit: Option<Forfeit>,
}

impl GameLog {
    pub fn game_result(&self) -> GameResult {
        GameResult {
            game_id: self.game_id.clone(),
            white: self.white.clone(),
            black: self.black.clone(),
            outcome: self.result,
        }
    }

    /// Replays the logged moves from the empty board and checks every stored
    /// position and the final result.
    pub fn verify(&self) -> Result<(), String> {
        let mut state = BoardState::empty();
        for (i, t) in self.turns.iter().enumerate() {
            if t.fen != state.to_fen() || t.player != state.to_move() || t.turn_index as usize != i {
                return Err(format!("turn {i} does not follow from the previous moves"));
            }
            let last = i + 1 == self.turns.len();
            if last && self.forfeit.is_some() {
                break;
            }
            let mv = t.chosen_move.ok_or_else(|| format!("turn {i} has no move"))?;
            state = state.apply_move(mv).map_err(|e| format!("turn {i}: {e}"))?;
        }
        let expected = match &self.forfeit {
            Some(f) => f.player.opponent().into(),
            None => state.winner(),
        };
        if expected != self.result || (self.forfeit.is_none() && !expected.is_terminal()) {
            return Err(format!("logged result {:?} but the moves give {expected:?}", self.result));
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.turns {
            writeln!(out, "{}", t.to_json())?;
        }
        let line = ResultLine {
            game_id: self.game_id.clone(),
            white: self.white.clone(),
            black: self.black.clone(),
            result: self.result,
            forfeit: self.forfeit.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&line).expect("serialisable"))
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Reads one or more game logs, each a run of turn lines closed by a result line.
pub fn read_game_logs<R: BufRead>(reader: R) -> Result<Vec<GameLog>, HarnessError> {
    let mut logs = Vec::new();
    let mut turns = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|source| RecordError::Json { line: i + 1, source })?;
        if value.get("result").is_some() && value.get("fen").is_none() {
            let r: ResultLine = serde_json::from_value(value)
                .map_err(|source| RecordError::Json { line: i + 1, source })?;
            if turns.iter().any(|t: &TurnRecord| t.game_id != r.game_id) {
                return Err(HarnessError::MalformedLog(format!("line {}: turns from another game", i + 1)));
            }
            logs.push(GameLog {
                game_id: r.game_id,
                white: r.white,
                black: r.black,
                turns: std::mem::take(&mut turns),
                result: r.result,
                forfeit: r.forfeit,
            });
        } else {
            turns.push(TurnRecord::from_json(&line).map_err(|source| RecordError::Json { line: i + 1, source })?);
        }
    }
    if !turns.is_empty() {
        return Err(HarnessError::MalformedLog("turns after the last result line".into()));
    }
    Ok(logs)
}

/// All turn records of the given logs, in order.
pub fn turn_records(logs: &[GameLog]) -> Vec<TurnRecord> {
    logs.iter().flat_map(|g| g.turns.iter().cloned()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameOptions {
    /// Ask again after an unreadable or illegal move instead of forfeiting.
    pub retry_invalid: bool,
    pub max_retries: usize,
    pub move_timeout: Duration,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions {
            retry_invalid: false,
            max_retries: MAX_RETRIES,
            move_timeout: DEFAULT_MOVE_TIMEOUT,
        }
    }
}

enum Attempt {
    Move(Coord),
    Forfeit(ForfeitReason, Option<Coord>),
}

fn judge(state: &BoardState, response: &Result<AgentResponse, String>) -> Attempt {
    let text = match response {
        Ok(r) => &r.text,
        Err(message) => return Attempt::Forfeit(ForfeitReason::Protocol { message: message.clone() }, None),
    };
    match parse_agent_response(text) {
        Ok((mv, _)) if state.is_empty_at(mv) => Attempt::Move(mv),
        Ok((mv, _)) => Attempt::Forfeit(
            ForfeitReason::IllegalMove {
                message: format!("square {mv} is occupied"),
            },
            Some(mv),
        ),
        Err(e @ ResponseError::OffBoard { .. }) => {
            Attempt::Forfeit(ForfeitReason::IllegalMove { message: e.to_string() }, None)
        }
        Err(e) => Attempt::Forfeit(ForfeitReason::Protocol { message: e.to_string() }, None),
    }
}

/// Plays one game from the empty board. Invalid responses forfeit the game
/// unless retries are enabled.
pub fn run_game(
    white: &Agent,
    black: &Agent,
    game_id: &str,
    seed: u64,
    options: &GameOptions,
) -> Result<GameLog, HarnessError> {
    let mut sessions = [white.start(options.move_timeout)?, black.start(options.move_timeout)?];
    let mut state = BoardState::empty();
    let mut turns = Vec::new();
    let mut forfeit = None;
    while !state.winner().is_terminal() {
        let turn = turns.len();
        let mover = state.to_move();
        let (agent, session) = match mover {
            Player::White => (white, &mut sessions[0]),
            Player::Black => (black, &mut sessions[1]),
        };
        let attempts = if options.retry_invalid { options.max_retries.max(1) } else { 1 };
        let mut outcome = None;
        for attempt in 0..attempts {
            let response = session.respond(&state, turn, derive_seed(seed, &format!("turn/{turn}/attempt/{attempt}")));
            let verdict = judge(&state, &response);
            let done = matches!(verdict, Attempt::Move(_)) || attempt + 1 == attempts;
            if done {
                outcome = Some((response, verdict));
                break;
            }
        }
        let (response, verdict) = outcome.expect("at least one attempt");
        let (text, tree) = match response {
            Ok(r) => (r.text, r.tree),
            Err(_) => (String::new(), None),
        };
        let chosen = match &verdict {
            Attempt::Move(mv) => Some(*mv),
            Attempt::Forfeit(_, mv) => *mv,
        };
        turns.push(TurnRecord {
            game_id: game_id.to_string(),
            turn_index: turn as u32,
            fen: state.to_fen(),
            player: mover,
            chosen_move: chosen,
            raw_response: text,
            tree: tree.map(|t| t.with_source(state.to_fen())),
            model_name: agent.name.clone(),
        });
        match verdict {
            Attempt::Move(mv) => state = state.apply_move(mv).expect("checked empty"),
            Attempt::Forfeit(reason, _) => {
                forfeit = Some(Forfeit { player: mover, reason });
                break;
            }
        }
    }
    let result = match &forfeit {
        Some(f) => f.player.opponent().into(),
        None => state.winner(),
    };
    Ok(GameLog {
        game_id: game_id.to_string(),
        white: white.name.clone(),
        black: black.name.clone(),
        turns,
        result,
        forfeit,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledGame {
    pub index: usize,
    pub game_id: String,
    pub white: usize,
    pub black: usize,
}

/// Every unordered pair of agents plays `games_per_pair` games, the lower
/// index taking White in even-numbered games.
pub fn schedule(n_agents: usize, games_per_pair: usize) -> Vec<ScheduledGame> {
    let mut out = Vec::new();
    for a in 0..n_agents {
        for b in a + 1..n_agents {
            for g in 0..games_per_pair {
                let (white, black) = if g % 2 == 0 { (a, b) } else { (b, a) };
                let index = out.len();
                out.push(ScheduledGame {
                    index,
                    game_id: format!("game-{index:05}"),
                    white,
                    black,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standing {
    pub name: String,
    pub played: usize,
    pub wins: usize,
    pub draws: usize,
    pub losses: usize,
    pub points: f64,
    pub winning_rate: Option<f64>,
}

pub fn standings(names: &[String], results: &[GameResult]) -> Vec<Standing> {
    let mut out: Vec<Standing> = names
        .iter()
        .map(|name| {
            let scores: Vec<f64> = results.iter().filter_map(|g| g.score_for(name)).collect();
            Standing {
                name: name.clone(),
                played: scores.len(),
                wins: scores.iter().filter(|&&s| s == 1.0).count(),
                draws: scores.iter().filter(|&&s| s == 0.5).count(),
                losses: scores.iter().filter(|&&s| s == 0.0).count(),
                points: scores.iter().sum(),
                winning_rate: winning_rate(name, results),
            }
        })
        .collect();
    out.sort_by(|a, b| b.points.total_cmp(&a.points).then_with(|| a.name.cmp(&b.name)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFailure {
    pub game_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tournament {
    pub games: Vec<GameLog>,
    pub failures: Vec<GameFailure>,
    pub standings: Vec<Standing>,
}

/// Plays the full round robin. Games run in parallel; logs come back in
/// schedule order. A game that cannot be run is recorded as a failure.
pub fn run_tournament(
    agents: &[Agent],
    games_per_pair: usize,
    seed: u64,
    options: &GameOptions,
) -> Result<Tournament, HarnessError> {
    if agents.len() < 2 {
        return Err(HarnessError::TooFewAgents);
    }
    let mut seen = BTreeSet::new();
    for a in agents {
        if !seen.insert(a.name.as_str()) {
            return Err(HarnessError::DuplicateAgent(a.name.clone()));
        }
    }
    let plan = schedule(agents.len(), games_per_pair);
    let outcomes: Vec<Result<GameLog, GameFailure>> = plan
        .par_iter()
        .map(|g| {
            let game_seed = derive_seed(seed, &format!("tournament/{}", g.game_id));
            run_game(&agents[g.white], &agents[g.black], &g.game_id, game_seed, options).map_err(|e| GameFailure {
                game_id: g.game_id.clone(),
                message: e.to_string(),
            })
        })
        .collect();
    let mut games = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(g) => games.push(g),
            Err(f) => failures.push(f),
        }
    }
    let names: Vec<String> = agents.iter().map(|a| a.name.clone()).collect();
    let results: Vec<GameResult> = games.iter().map(GameLog::game_result).collect();
    Ok(Tournament {
        standings: standings(&names, &results),
        games,
        failures,
    })
}
