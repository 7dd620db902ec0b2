//! Turn records and the line-delimited dataset format.
//!
//! One JSON object per line:
//!
//! ```text
//! {"game_id": "g0", "turn_index": 3, "fen": "...", "player": "White",
//!  "chosen_move": "1,4", "raw_response": "...", "tree": {"trees": [...]},
//!  "model_name": "myopic-bot"}
//! ```
//!
//! `chosen_move` and `tree` may be null. A move that does not parse is read
//! as absent, and so is a tree document that does not parse; the raw line is
//! still available to `validate-trees` style diagnostics.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::board::{Coord, Player};
use crate::tree::{CoordSyntax, SearchTree, TreeError};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnRecord {
    pub game_id: String,
    pub turn_index: u32,
    pub fen: String,
    pub player: Player,
    pub chosen_move: Option<Coord>,
    pub raw_response: String,
    pub tree: Option<SearchTree>,
    pub model_name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTurnRecord {
    game_id: String,
    turn_index: u32,
    fen: String,
    player: Player,
    #[serde(default)]
    chosen_move: Option<String>,
    #[serde(default)]
    raw_response: String,
    #[serde(default)]
    tree: Option<Value>,
    model_name: String,
}

/// Reads `r,c` or `m r c`.
pub fn parse_any_move(text: &str) -> Option<Coord> {
    Coord::parse_pair(text)
        .or_else(|_| Coord::parse_move(text))
        .ok()
}

impl TurnRecord {
    pub fn tree_diagnostic(line: &str) -> Result<Option<TreeError>, serde_json::Error> {
        let raw: RawTurnRecord = serde_json::from_str(line)?;
        Ok(match raw.tree {
            None | Some(Value::Null) => None,
            Some(v) => SearchTree::from_value(&v, CoordSyntax::Strict).err(),
        })
    }

    pub fn from_json(line: &str) -> Result<TurnRecord, serde_json::Error> {
        let raw: RawTurnRecord = serde_json::from_str(line)?;
        let tree = raw
            .tree
            .filter(|v| !v.is_null())
            .and_then(|v| SearchTree::from_value(&v, CoordSyntax::Strict).ok())
            .map(|t| t.with_source(raw.fen.clone()));
        Ok(TurnRecord {
            chosen_move: raw.chosen_move.as_deref().and_then(parse_any_move),
            game_id: raw.game_id,
            turn_index: raw.turn_index,
            fen: raw.fen,
            player: raw.player,
            raw_response: raw.raw_response,
            tree,
            model_name: raw.model_name,
        })
    }

    pub fn to_value(&self) -> Value {
        serde_json::json!({
            "game_id": self.game_id,
            "turn_index": self.turn_index,
            "fen": self.fen,
            "player": self.player,
            "chosen_move": self.chosen_move.map(Coord::to_pair),
            "raw_response": self.raw_response,
            "tree": self.tree.as_ref().map(SearchTree::to_value),
            "model_name": self.model_name,
        })
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }
}

pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<TurnRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(TurnRecord::from_json(&line).map_err(|source| RecordError::Json { line: i + 1, source })?);
    }
    Ok(out)
}

pub fn write_records<W: Write>(mut writer: W, records: &[TurnRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(writer, "{}", r.to_json())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_lenient_fields() {
        let line = r#"{"game_id":"g1","turn_index":2,"fen":"W8/9/9/9","player":"Black","chosen_move":"1,4","raw_response":"hi","tree":{"trees":[["1,4",["0,1"]],["2,2"]]},"model_name":"m"}"#;
        let r = TurnRecord::from_json(line).unwrap();
        assert_eq!(r.chosen_move, Some(Coord::at(1, 4)));
        assert_eq!(r.tree.as_ref().unwrap().roots.len(), 2);
        let again = TurnRecord::from_json(&r.to_json()).unwrap();
        assert_eq!(again, r);

        let odd = line.replace(r#""1,4","raw"#, r#""m 1 4","raw"#);
        assert_eq!(TurnRecord::from_json(&odd).unwrap().chosen_move, Some(Coord::at(1, 4)));
        let bad = line.replace(r#""chosen_move":"1,4""#, r#""chosen_move":"left""#);
        assert_eq!(TurnRecord::from_json(&bad).unwrap().chosen_move, None);
        let empty = line.replace(r#"{"trees":[["1,4",["0,1"]],["2,2"]]}"#, r#"{"trees":[]}"#);
        assert_eq!(TurnRecord::from_json(&empty).unwrap().tree, None);
        assert_eq!(TurnRecord::tree_diagnostic(&empty).unwrap(), Some(TreeError::EmptyForest));
        assert_eq!(TurnRecord::tree_diagnostic(line).unwrap(), None);
    }
}
