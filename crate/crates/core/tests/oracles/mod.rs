//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the library's own window scan,
//! classifier or backup code; boards are rebuilt from raw cell arrays.
#![allow(dead_code)]

use fiar_core::board::{Cell, CELLS, COLS, ROWS};
use fiar_core::intervene::{Mention, ParagraphLabel, ParagraphType};
use fiar_core::{BoardState, Coord, HeuristicParams, Player, SearchTree, TreeNode};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Line = [(usize, usize); 4];

/// Every in-bounds run of four cells in the four line directions, found by
/// trying every start cell. Each line is listed once (forward direction).
pub fn brute_lines() -> Vec<Line> {
    let dirs: [(i64, i64); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
    let mut out = Vec::new();
    for r in 0..ROWS as i64 {
        for c in 0..COLS as i64 {
            for (dr, dc) in dirs {
                let cells: Vec<(i64, i64)> = (0..4).map(|k| (r + k * dr, c + k * dc)).collect();
                if cells.iter().all(|&(y, x)| (0..ROWS as i64).contains(&y) && (0..COLS as i64).contains(&x)) {
                    let mut line = [(0, 0); 4];
                    for (slot, (y, x)) in line.iter_mut().zip(cells) {
                        *slot = (y as usize, x as usize);
                    }
                    out.push(line);
                }
            }
        }
    }
    out
}

pub fn grid(state: &BoardState) -> [[Cell; COLS]; ROWS] {
    let mut g = [[Cell::Empty; COLS]; ROWS];
    for (i, &cell) in state.cells().iter().enumerate() {
        g[i / COLS][i % COLS] = cell;
    }
    g
}

pub fn has_line(state: &BoardState, player: Player) -> bool {
    let g = grid(state);
    brute_lines()
        .iter()
        .any(|line| line.iter().all(|&(r, c)| g[r][c] == player.cell()))
}

/// Feature values recomputed from the raw grid: `[centre, conn2, unconn2, three, four]`.
pub fn brute_features(state: &BoardState, player: Player) -> [f64; 5] {
    let g = grid(state);
    let mut out = [0.0; 5];
    for (r, row) in g.iter().enumerate() {
        for (c, &cell) in row.iter().enumerate() {
            if cell == player.cell() {
                let (dr, dc) = (r as f64 - 1.5, c as f64 - 4.0);
                let d = (dr * dr + dc * dc).sqrt();
                out[0] += 1.0 / d;
            }
        }
    }
    for line in brute_lines() {
        let own: Vec<usize> = (0..4).filter(|&k| g[line[k].0][line[k].1] == player.cell()).collect();
        let blocked = line.iter().any(|&(r, c)| g[r][c] == player.opponent().cell());
        if blocked {
            continue;
        }
        match own.len() {
            2 if own[1] == own[0] + 1 => out[1] += 1.0,
            2 => out[2] += 1.0,
            3 => out[3] += 1.0,
            4 => out[4] += 1.0,
            _ => {}
        }
    }
    out
}

/// The heuristic written out from the brute-force features.
pub fn brute_value(state: &BoardState, p: &HeuristicParams, mover: Player) -> f64 {
    let own = brute_features(state, mover);
    let opp = brute_features(state, mover.opponent());
    let mut v = p.w_centre * (own[0] - opp[0]);
    for i in 0..4 {
        v += p.w[i] * (p.c * own[i + 1] - opp[i + 1]);
    }
    v
}

/// FEN written directly from the cell array.
pub fn brute_fen(state: &BoardState) -> String {
    let g = grid(state);
    let rows: Vec<String> = g
        .iter()
        .map(|row| {
            let mut s = String::new();
            let mut run = 0;
            for &cell in row {
                let sym = match cell {
                    Cell::Empty => None,
                    Cell::White => Some('W'),
                    Cell::Black => Some('B'),
                };
                match sym {
                    None => run += 1,
                    Some(ch) => {
                        if run > 0 {
                            s.push_str(&run.to_string());
                            run = 0;
                        }
                        s.push(ch);
                    }
                }
            }
            if run > 0 {
                s.push_str(&run.to_string());
            }
            s
        })
        .collect();
    rows.join("/")
}

/// A balanced random position, not necessarily reachable in play.
pub fn random_board<R: Rng>(rng: &mut R) -> BoardState {
    let k = rng.gen_range(0..=CELLS);
    let mut idx: Vec<usize> = (0..CELLS).collect();
    idx.shuffle(rng);
    let mut cells = [Cell::Empty; CELLS];
    let n_white = k.div_ceil(2);
    for (n, &i) in idx[..k].iter().enumerate() {
        cells[i] = if n < n_white { Cell::White } else { Cell::Black };
    }
    BoardState::from_cells(cells).expect("balanced by construction")
}

/// A position reached by random legal play that has not been decided.
pub fn random_open_position<R: Rng>(rng: &mut R, max_plies: usize) -> BoardState {
    'outer: loop {
        let mut s = BoardState::empty();
        for _ in 0..rng.gen_range(0..=max_plies) {
            let moves: Vec<Coord> = s.empty_cells().collect();
            s = s.apply_move(*moves.choose(rng).unwrap()).unwrap();
            if has_line(&s, Player::White) || has_line(&s, Player::Black) {
                continue 'outer;
            }
        }
        if s.empty_cells().count() >= 6 {
            return s;
        }
    }
}

fn random_node<R: Rng>(rng: &mut R, state: &BoardState, mv: Coord, depth: usize, max_depth: usize) -> TreeNode {
    let next = state.apply_move(mv).unwrap();
    let mut node = TreeNode::leaf(mv);
    let decided = has_line(&next, Player::White) || has_line(&next, Player::Black);
    if depth < max_depth && !decided && rng.gen_bool(0.7) {
        let mut replies: Vec<Coord> = next.empty_cells().collect();
        replies.shuffle(rng);
        let k = rng.gen_range(1..=3).min(replies.len());
        node.children = replies[..k]
            .iter()
            .map(|&r| random_node(rng, &next, r, depth + 1, max_depth))
            .collect();
    }
    node
}

/// A random tree of legal moves with depth at most `max_depth`.
pub fn random_legal_tree<R: Rng>(rng: &mut R, root: &BoardState, max_depth: usize) -> SearchTree {
    let mut moves: Vec<Coord> = root.empty_cells().collect();
    moves.shuffle(rng);
    let breadth = rng.gen_range(1..=5).min(moves.len());
    let roots = moves[..breadth]
        .iter()
        .map(|&m| random_node(rng, root, m, 1, max_depth))
        .collect();
    SearchTree::new(roots)
}

/// Minimax by replaying moves and asking the board whose turn it is,
/// with the root mover's heuristic at every state. `gamma = None` is the
/// pure minimax rule; `Some(g)` blends node value and child extreme.
pub fn oracle_value(node: &TreeNode, state: &BoardState, p: &HeuristicParams, mover: Player, gamma: Option<f64>) -> f64 {
    let next = state.apply_move(node.mv).unwrap();
    let h = brute_value(&next, p, mover);
    if node.children.is_empty() {
        return h;
    }
    let vals: Vec<f64> = node
        .children
        .iter()
        .map(|c| oracle_value(c, &next, p, mover, gamma))
        .collect();
    let ext = if next.to_move() == mover {
        vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        vals.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    match gamma {
        None => ext,
        Some(g) => (1.0 - g) * h + g * ext,
    }
}

pub fn brute_size(node: &TreeNode) -> usize {
    1 + node.children.iter().map(brute_size).sum::<usize>()
}

pub fn brute_depth_counts(node: &TreeNode, depth: usize, counts: &mut Vec<usize>) {
    if counts.len() < depth {
        counts.resize(depth, 0);
    }
    counts[depth - 1] += 1;
    for c in &node.children {
        brute_depth_counts(c, depth + 1, counts);
    }
}

pub fn random_params<R: Rng>(rng: &mut R) -> HeuristicParams {
    HeuristicParams::new(
        rng.gen_range(-2.0..2.0),
        [0; 4].map(|_| rng.gen_range(-3.0..3.0)),
        rng.gen_range(0.25..5.0),
        rng.gen_range(0.0..1.0),
    )
    .unwrap()
}

/// The five-paragraph labelled trace: preamble, a three-paragraph branch
/// on (1,4), and a final decision.
pub fn five_paragraph_fixture() -> (String, Vec<ParagraphLabel>) {
    let trace = "I am White and need a plan for this position.\n\n\
                 Consider 1,4 first, it takes the centre.\n\n\
                 If Black answers at 2,3 the diagonal is contested.\n\n\
                 So 1,4 holds up, although 0,3 later is a worry.\n\n\
                 Final answer: m 1 4"
        .to_string();
    let t = Some(Coord::at(1, 4));
    let m = |r, c, depth| Mention {
        coord: Coord::at(r, c),
        depth,
    };
    let labels = vec![
        ParagraphLabel::new(0, ParagraphType::Preamble, None, vec![]),
        ParagraphLabel::new(1, ParagraphType::BranchStart, t, vec![m(1, 4, 1)]),
        ParagraphLabel::new(2, ParagraphType::BranchAnalysis, t, vec![m(2, 3, 2)]),
        ParagraphLabel::new(3, ParagraphType::BranchConclusion, t, vec![m(1, 4, 1), m(0, 3, 3)]),
        ParagraphLabel::new(4, ParagraphType::FinalDecision, None, vec![]),
    ];
    (trace, labels)
}

/// Expected removed paragraphs for the fixture, by strategy name.
pub const FIXTURE_EXPECTED: [(&str, &[usize]); 4] = [
    ("fd", &[4]),
    ("fd+branch:1,4", &[1, 2, 3, 4]),
    ("addback-d1:1,4", &[2, 3, 4]),
    ("addback-d12:1,4", &[3, 4]),
];

/// A trace whose (1,4) branch holds about 90% of the characters.
pub fn ninety_percent_fixture() -> (String, Vec<ParagraphLabel>) {
    let branch = "x".repeat(900);
    let trace = format!("{}\n\n{branch}\n\n{}", "p".repeat(103), "m 1 4".repeat(9));
    let labels = vec![
        ParagraphLabel::new(0, ParagraphType::Preamble, None, vec![]),
        ParagraphLabel::new(1, ParagraphType::BranchAnalysis, Some(Coord::at(1, 4)), vec![]),
        ParagraphLabel::new(2, ParagraphType::FinalDecision, None, vec![]),
    ];
    (trace, labels)
}
