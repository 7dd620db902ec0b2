//! Spatial-pattern heuristic: a centre-proximity feature plus four window
//! pattern counts per player, combined linearly with an offensive scale on
//! the mover's pattern terms.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{all_windows, BoardState, Cell, Player, Window};

pub const CENTRE_ROW: f64 = 1.5;
pub const CENTRE_COL: f64 = 4.0;
pub const C_MIN: f64 = 0.25;
pub const C_MAX: f64 = 5.0;

/// Per-player feature values. Pattern classes are mutually exclusive per
/// window and summed over all unobstructed windows.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureCounts {
    pub centre: f64,
    pub connected2: u32,
    pub unconnected2: u32,
    pub three: u32,
    pub four: u32,
}

impl FeatureCounts {
    pub fn patterns(&self) -> [f64; 4] {
        [
            self.connected2 as f64,
            self.unconnected2 as f64,
            self.three as f64,
            self.four as f64,
        ]
    }
}

/// How a window with no opponent pieces is classified for its owner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Connected2,
    Unconnected2,
    Three,
    Four,
}

pub fn classify_window(state: &BoardState, window: &Window, player: Player) -> Option<Pattern> {
    let own = player.cell();
    let mut positions = [0usize; 4];
    let mut n = 0;
    for (i, &at) in window.cells.iter().enumerate() {
        match state.get(at) {
            Cell::Empty => {}
            c if c == own => {
                positions[n] = i;
                n += 1;
            }
            _ => return None,
        }
    }
    match n {
        2 if positions[1] - positions[0] == 1 => Some(Pattern::Connected2),
        2 => Some(Pattern::Unconnected2),
        3 => Some(Pattern::Three),
        4 => Some(Pattern::Four),
        _ => None,
    }
}

pub fn centre_feature(state: &BoardState, player: Player) -> f64 {
    state
        .pieces(player)
        .map(|at| {
            let dr = at.row() as f64 - CENTRE_ROW;
            let dc = at.col() as f64 - CENTRE_COL;
            1.0 / (dr * dr + dc * dc).sqrt()
        })
        .sum()
}

pub fn count_features(state: &BoardState, player: Player) -> FeatureCounts {
    let mut out = FeatureCounts {
        centre: centre_feature(state, player),
        ..FeatureCounts::default()
    };
    for w in all_windows() {
        match classify_window(state, w, player) {
            Some(Pattern::Connected2) => out.connected2 += 1,
            Some(Pattern::Unconnected2) => out.unconnected2 += 1,
            Some(Pattern::Three) => out.three += 1,
            Some(Pattern::Four) => out.four += 1,
            None => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("offensive scale C = {0} is outside [{C_MIN}, {C_MAX}]")]
    ScaleOutOfRange(f64),
    #[error("discount gamma = {0} is outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

/// Heuristic weights, offensive scale `c` and discount `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicParams {
    pub w_centre: f64,
    /// Pattern weights: connected two, unconnected two, three, four.
    pub w: [f64; 4],
    #[serde(rename = "C")]
    pub c: f64,
    pub gamma: f64,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            w_centre: 0.0,
            w: [0.0; 4],
            c: 1.0,
            gamma: 0.0,
        }
    }
}

const PARAM_KEYS: [&str; 7] = ["w_centre", "w_conn2", "w_unconn2", "w_three", "w_four", "C", "gamma"];

impl HeuristicParams {
    pub fn new(w_centre: f64, w: [f64; 4], c: f64, gamma: f64) -> Result<Self, ParamsError> {
        let p = HeuristicParams { w_centre, w, c, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(C_MIN..=C_MAX).contains(&self.c) {
            return Err(ParamsError::ScaleOutOfRange(self.c));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ParamsError::GammaOutOfRange(self.gamma));
        }
        Ok(())
    }

    pub fn w_four(&self) -> f64 {
        self.w[3]
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        HeuristicParams { gamma, ..self }
    }

    /// All five weights multiplied by `k`; `c` and `gamma` untouched.
    pub fn scale_weights(self, k: f64) -> Self {
        HeuristicParams {
            w_centre: self.w_centre * k,
            w: self.w.map(|x| x * k),
            ..self
        }
    }

    /// Reads the flat `key = value` parameter format. `gamma` defaults to 0.
    pub fn from_kv(text: &str) -> Result<Self, ParamsError> {
        let mut seen: BTreeMap<&str, f64> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| ParamsError::Syntax {
                    line: i + 1,
                    reason: "expected `key = value`".into(),
                })?;
            let k = k.trim();
            let key = PARAM_KEYS
                .iter()
                .find(|&&p| p == k)
                .ok_or_else(|| ParamsError::UnknownKey(k.to_string()))?;
            let value: f64 = v.trim().parse().map_err(|_| ParamsError::Syntax {
                line: i + 1,
                reason: format!("`{}` is not a decimal number", v.trim()),
            })?;
            seen.insert(key, value);
        }
        let get = |k: &'static str| seen.get(k).copied().ok_or(ParamsError::MissingKey(k));
        let p = HeuristicParams {
            w_centre: get("w_centre")?,
            w: [get("w_conn2")?, get("w_unconn2")?, get("w_three")?, get("w_four")?],
            c: get("C")?,
            gamma: seen.get("gamma").copied().unwrap_or(0.0),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_kv(&self) -> String {
        let values = [
            self.w_centre,
            self.w[0],
            self.w[1],
            self.w[2],
            self.w[3],
            self.c,
            self.gamma,
        ];
        PARAM_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v:?}\n"))
            .collect()
    }
}

impl fmt::Display for HeuristicParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv())
    }
}

/// Features of one state seen from a fixed perspective, enough to evaluate
/// the heuristic for any parameter vector without touching the board again.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub centre_diff: f64,
    pub own: [f64; 4],
    pub opp: [f64; 4],
}

impl FeatureVector {
    pub fn of(state: &BoardState, perspective: Player) -> FeatureVector {
        let own = count_features(state, perspective);
        let opp = count_features(state, perspective.opponent());
        FeatureVector {
            centre_diff: own.centre - opp.centre,
            own: own.patterns(),
            opp: opp.patterns(),
        }
    }

    pub fn value(&self, params: &HeuristicParams) -> f64 {
        let mut v = params.w_centre * self.centre_diff;
        for i in 0..4 {
            v += params.w[i] * (params.c * self.own[i] - self.opp[i]);
        }
        v
    }
}

/// Heuristic value of `state` for `mover`; `c` scales only the mover's
/// pattern counts.
pub fn evaluate(state: &BoardState, params: &HeuristicParams, mover: Player) -> f64 {
    FeatureVector::of(state, mover).value(params)
}
