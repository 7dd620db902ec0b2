//! The 4x9 four-in-a-row board: FEN codec, legality, move application and
//! terminal detection.
//!
//! There is no gravity. A move may be placed in any empty cell, and White
//! always moves first, so the side to move is fully determined by the piece
//! counts.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ROWS: usize = 4;
pub const COLS: usize = 9;
pub const CELLS: usize = ROWS * COLS;
/// Number of length-4 lines on the board.
pub const WINDOW_COUNT: usize = 45;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("malformed FEN `{fen}`: {reason}")]
    MalformedFen { fen: String, reason: String },
    #[error("illegal piece balance: {white} white vs {black} black")]
    IllegalPieceBalance { white: usize, black: usize },
    #[error("side to move {given} contradicts piece counts (expected {expected})")]
    ToMoveMismatch { given: Player, expected: Player },
    #[error("cell {0} is occupied")]
    OccupiedCell(Coord),
    #[error("coordinate ({row},{col}) is off the board")]
    OutOfBounds { row: i64, col: i64 },
    #[error("the game is already decided")]
    TerminalState,
    #[error("malformed move `{0}`")]
    MalformedMove(String),
    #[error("malformed coordinate `{0}`")]
    MalformedCoord(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    White,
    Black,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::White => Player::Black,
            Player::Black => Player::White,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Player::White => 'W',
            Player::Black => 'B',
        }
    }

    pub fn cell(self) -> Cell {
        match self {
            Player::White => Cell::White,
            Player::Black => Cell::Black,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::White => f.write_str("White"),
            Player::Black => f.write_str("Black"),
        }
    }
}

impl FromStr for Player {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "White" | "white" | "W" | "w" => Ok(Player::White),
            "Black" | "black" | "B" | "b" => Ok(Player::Black),
            other => Err(BoardError::MalformedMove(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Cell {
    #[default]
    Empty,
    White,
    Black,
}

impl Cell {
    pub fn owner(self) -> Option<Player> {
        match self {
            Cell::Empty => None,
            Cell::White => Some(Player::White),
            Cell::Black => Some(Player::Black),
        }
    }
}

/// A zero-indexed board cell, row 0 at the top and column 0 at the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    row: u8,
    col: u8,
}

impl Coord {
    pub fn new(row: usize, col: usize) -> Result<Coord, BoardError> {
        if row < ROWS && col < COLS {
            Ok(Coord {
                row: row as u8,
                col: col as u8,
            })
        } else {
            Err(BoardError::OutOfBounds {
                row: row as i64,
                col: col as i64,
            })
        }
    }

    /// Panics on out-of-range input. For constants and loops over the grid.
    pub const fn at(row: usize, col: usize) -> Coord {
        assert!(row < ROWS && col < COLS);
        Coord {
            row: row as u8,
            col: col as u8,
        }
    }

    pub fn row(self) -> usize {
        self.row as usize
    }

    pub fn col(self) -> usize {
        self.col as usize
    }

    pub fn index(self) -> usize {
        self.row() * COLS + self.col()
    }

    pub fn from_index(index: usize) -> Coord {
        Coord::at(index / COLS, index % COLS)
    }

    /// All 36 cells in row-major order.
    pub fn all() -> impl Iterator<Item = Coord> {
        (0..CELLS).map(Coord::from_index)
    }

    /// Parses the strict `r,c` form used by extraction documents and label files.
    pub fn parse_pair(text: &str) -> Result<Coord, BoardError> {
        let bad = || BoardError::MalformedCoord(text.to_string());
        let (r, c) = text.split_once(',').ok_or_else(bad)?;
        let row = parse_index(r).ok_or_else(bad)?;
        let col = parse_index(c).ok_or_else(bad)?;
        Coord::new(row, col)
    }

    /// The `r,c` form, no spaces.
    pub fn to_pair(self) -> String {
        format!("{},{}", self.row, self.col)
    }

    /// Parses move notation `m <row> <col>` (single spaces, decimal digits).
    pub fn parse_move(text: &str) -> Result<Coord, BoardError> {
        let bad = || BoardError::MalformedMove(text.to_string());
        let rest = text.strip_prefix("m ").ok_or_else(bad)?;
        let (r, c) = rest.split_once(' ').ok_or_else(bad)?;
        let row = parse_index(r).ok_or_else(bad)?;
        let col = parse_index(c).ok_or_else(bad)?;
        Coord::new(row, col)
    }

    pub fn to_move_notation(self) -> String {
        format!("m {} {}", self.row, self.col)
    }
}

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || s.len() > 3 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

impl Serialize for Coord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_pair())
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Coord::parse_pair(&s).map_err(serde::de::Error::custom)
    }
}

/// Four cells along a row, column or diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub cells: [Coord; 4],
}

/// Every length-4 line in scan order: horizontals (row-major), verticals,
/// down-right diagonals, down-left diagonals.
pub fn all_windows() -> &'static [Window] {
    static WINDOWS: OnceLock<Vec<Window>> = OnceLock::new();
    WINDOWS.get_or_init(|| {
        let mut out = Vec::with_capacity(WINDOW_COUNT);
        for r in 0..ROWS {
            for c in 0..=COLS - 4 {
                out.push(Window {
                    cells: [0, 1, 2, 3].map(|k| Coord::at(r, c + k)),
                });
            }
        }
        for c in 0..COLS {
            out.push(Window {
                cells: [0, 1, 2, 3].map(|k| Coord::at(k, c)),
            });
        }
        for c in 0..=COLS - 4 {
            out.push(Window {
                cells: [0, 1, 2, 3].map(|k| Coord::at(k, c + k)),
            });
        }
        for c in 3..COLS {
            out.push(Window {
                cells: [0, 1, 2, 3].map(|k| Coord::at(k, c - k)),
            });
        }
        debug_assert_eq!(out.len(), WINDOW_COUNT);
        out
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    White,
    Black,
    Draw,
    Ongoing,
}

impl Outcome {
    pub fn winner(self) -> Option<Player> {
        match self {
            Outcome::White => Some(Player::White),
            Outcome::Black => Some(Player::Black),
            _ => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Outcome::Ongoing
    }
}

impl From<Player> for Outcome {
    fn from(p: Player) -> Self {
        match p {
            Player::White => Outcome::White,
            Player::Black => Outcome::Black,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardState {
    cells: [Cell; CELLS],
    to_move: Player,
}

impl Default for BoardState {
    fn default() -> Self {
        Self::empty()
    }
}

impl BoardState {
    pub fn empty() -> BoardState {
        BoardState {
            cells: [Cell::Empty; CELLS],
            to_move: Player::White,
        }
    }

    /// Builds a state from a grid, inferring the side to move.
    pub fn from_cells(cells: [Cell; CELLS]) -> Result<BoardState, BoardError> {
        let white = cells.iter().filter(|&&c| c == Cell::White).count();
        let black = cells.iter().filter(|&&c| c == Cell::Black).count();
        let to_move = match white.checked_sub(black) {
            Some(0) => Player::White,
            Some(1) => Player::Black,
            _ => return Err(BoardError::IllegalPieceBalance { white, black }),
        };
        Ok(BoardState { cells, to_move })
    }

    pub fn parse_fen(text: &str) -> Result<BoardState, BoardError> {
        let malformed = |reason: String| BoardError::MalformedFen {
            fen: text.to_string(),
            reason,
        };
        let rows: Vec<&str> = text.split('/').collect();
        if rows.len() != ROWS {
            return Err(malformed(format!("expected {ROWS} rows, found {}", rows.len())));
        }
        let mut cells = [Cell::Empty; CELLS];
        for (r, row) in rows.iter().enumerate() {
            let mut c = 0usize;
            for ch in row.chars() {
                let width = match ch {
                    'W' | 'B' => 1,
                    '1'..='9' => ch as usize - '0' as usize,
                    _ => return Err(malformed(format!("illegal character `{ch}` in row {r}"))),
                };
                if c + width > COLS {
                    return Err(malformed(format!("row {r} is longer than {COLS} cells")));
                }
                match ch {
                    'W' => cells[r * COLS + c] = Cell::White,
                    'B' => cells[r * COLS + c] = Cell::Black,
                    _ => {}
                }
                c += width;
            }
            if c != COLS {
                return Err(malformed(format!("row {r} covers {c} cells, expected {COLS}")));
            }
        }
        BoardState::from_cells(cells)
    }

    /// Grid-only parse that skips the piece-balance check. The side to move
    /// is White unless White has more pieces. For hand-built diagnostic
    /// positions that play could not reach.
    pub fn parse_fen_unbalanced(text: &str) -> Result<BoardState, BoardError> {
        match BoardState::parse_fen(text) {
            Err(BoardError::IllegalPieceBalance { .. }) => {}
            other => return other,
        }
        let mut cells = [Cell::Empty; CELLS];
        for (r, row) in text.split('/').enumerate() {
            let mut c = 0;
            for ch in row.chars() {
                match ch {
                    'W' => cells[r * COLS + c] = Cell::White,
                    'B' => cells[r * COLS + c] = Cell::Black,
                    _ => {
                        c += ch as usize - '0' as usize;
                        continue;
                    }
                }
                c += 1;
            }
        }
        Ok(BoardState::from_cells_unbalanced(cells))
    }

    pub fn from_cells_unbalanced(cells: [Cell; CELLS]) -> BoardState {
        let white = cells.iter().filter(|&&c| c == Cell::White).count();
        let black = cells.iter().filter(|&&c| c == Cell::Black).count();
        let to_move = if white > black { Player::Black } else { Player::White };
        BoardState { cells, to_move }
    }

    /// Parses a FEN and checks it against an explicitly stated side to move.
    pub fn parse_fen_with_player(text: &str, player: Player) -> Result<BoardState, BoardError> {
        let state = BoardState::parse_fen(text)?;
        if state.to_move != player {
            return Err(BoardError::ToMoveMismatch {
                given: player,
                expected: state.to_move,
            });
        }
        Ok(state)
    }

    /// Canonical FEN with maximal empty runs.
    pub fn to_fen(&self) -> String {
        let mut out = String::with_capacity(24);
        for r in 0..ROWS {
            if r > 0 {
                out.push('/');
            }
            let mut run = 0;
            for c in 0..COLS {
                match self.cells[r * COLS + c].owner() {
                    None => run += 1,
                    Some(p) => {
                        if run > 0 {
                            out.push(char::from(b'0' + run));
                            run = 0;
                        }
                        out.push(p.symbol());
                    }
                }
            }
            if run > 0 {
                out.push(char::from(b'0' + run));
            }
        }
        out
    }

    pub fn to_move(&self) -> Player {
        self.to_move
    }

    pub fn get(&self, at: Coord) -> Cell {
        self.cells[at.index()]
    }

    pub fn cells(&self) -> &[Cell; CELLS] {
        &self.cells
    }

    pub fn is_empty_at(&self, at: Coord) -> bool {
        self.get(at) == Cell::Empty
    }

    pub fn count(&self, player: Player) -> usize {
        let target = player.cell();
        self.cells.iter().filter(|&&c| c == target).count()
    }

    pub fn pieces(&self, player: Player) -> impl Iterator<Item = Coord> + '_ {
        let target = player.cell();
        Coord::all().filter(move |&at| self.get(at) == target)
    }

    pub fn empty_cells(&self) -> impl Iterator<Item = Coord> + '_ {
        Coord::all().filter(move |&at| self.is_empty_at(at))
    }

    pub fn piece_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != Cell::Empty).count()
    }

    /// Empty cells in row-major order.
    pub fn legal_moves(&self) -> Result<Vec<Coord>, BoardError> {
        if self.winner().is_terminal() {
            return Err(BoardError::TerminalState);
        }
        Ok(self.empty_cells().collect())
    }

    pub fn apply_move(&self, at: Coord) -> Result<BoardState, BoardError> {
        if self.winner().is_terminal() {
            return Err(BoardError::TerminalState);
        }
        self.place(at)
    }

    /// Places the side to move's piece without checking for a decided game.
    pub fn place(&self, at: Coord) -> Result<BoardState, BoardError> {
        if !self.is_empty_at(at) {
            return Err(BoardError::OccupiedCell(at));
        }
        let mut next = *self;
        next.cells[at.index()] = self.to_move.cell();
        next.to_move = self.to_move.opponent();
        Ok(next)
    }

    /// First completed window in scan order decides the winner.
    pub fn winner(&self) -> Outcome {
        for w in all_windows() {
            let first = self.get(w.cells[0]);
            if first != Cell::Empty && w.cells[1..].iter().all(|&at| self.get(at) == first) {
                return match first {
                    Cell::White => Outcome::White,
                    _ => Outcome::Black,
                };
            }
        }
        if self.cells.iter().all(|&c| c != Cell::Empty) {
            Outcome::Draw
        } else {
            Outcome::Ongoing
        }
    }

    /// Winners of every completed window. More than one entry marks a
    /// position that play could not have reached.
    pub fn completed_windows(&self) -> Vec<(Player, Window)> {
        all_windows()
            .iter()
            .filter_map(|w| {
                let owner = self.get(w.cells[0]).owner()?;
                w.cells[1..]
                    .iter()
                    .all(|&at| self.get(at).owner() == Some(owner))
                    .then_some((owner, *w))
            })
            .collect()
    }
}

impl fmt::Display for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_fen())
    }
}

impl FromStr for BoardState {
    type Err = BoardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BoardState::parse_fen(s)
    }
}
