//! Extracted search trees in the nested-list extraction format
//! `{"trees": [["r,c", child, child, ...], ...]}`.
//!
//! Depth-1 nodes are the mover's candidate moves, depth-2 nodes the
//! opponent's replies, and so on with strict alternation.

use serde_json::Value;
use thiserror::Error;

use crate::board::{BoardError, BoardState, Coord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("malformed extraction document: {0}")]
    MalformedDocument(String),
    #[error("bad coordinate `{0}`")]
    BadCoordinate(String),
    #[error("extraction document has no trees")]
    EmptyForest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub mv: Coord,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(mv: Coord) -> TreeNode {
        TreeNode {
            mv,
            children: Vec::new(),
        }
    }

    pub fn with_children(mv: Coord, children: Vec<TreeNode>) -> TreeNode {
        TreeNode { mv, children }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TreeNode::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(TreeNode::depth).max().unwrap_or(0)
    }
}

/// Merges siblings that share a move, keeping first-mention order and
/// appending the later duplicate's children to the first occurrence.
fn merge_siblings(nodes: Vec<TreeNode>) -> Vec<TreeNode> {
    let mut out: Vec<TreeNode> = Vec::with_capacity(nodes.len());
    for node in nodes {
        match out.iter_mut().find(|n| n.mv == node.mv) {
            Some(existing) => existing.children.extend(node.children),
            None => out.push(node),
        }
    }
    for n in &mut out {
        let children = std::mem::take(&mut n.children);
        n.children = merge_siblings(children);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchTree {
    pub roots: Vec<TreeNode>,
    pub source_fen: Option<String>,
}

/// Coordinate forms accepted when reading extraction documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordSyntax {
    /// Only `"r,c"`.
    #[default]
    Strict,
    /// Also the tuple rendering `"(r,c)"`.
    AllowTuple,
}

impl SearchTree {
    pub fn new(roots: Vec<TreeNode>) -> SearchTree {
        SearchTree {
            roots: merge_siblings(roots),
            source_fen: None,
        }
    }

    pub fn with_source(mut self, fen: impl Into<String>) -> SearchTree {
        self.source_fen = Some(fen.into());
        self
    }

    pub fn candidates(&self) -> Vec<Coord> {
        self.roots.iter().map(|n| n.mv).collect()
    }

    pub fn contains_candidate(&self, mv: Coord) -> bool {
        self.roots.iter().any(|n| n.mv == mv)
    }

    pub fn parse(doc: &str) -> Result<SearchTree, TreeError> {
        SearchTree::parse_with(doc, CoordSyntax::Strict)
    }

    pub fn parse_with(doc: &str, syntax: CoordSyntax) -> Result<SearchTree, TreeError> {
        let value: Value = serde_json::from_str(doc)
            .map_err(|e| TreeError::MalformedDocument(e.to_string()))?;
        SearchTree::from_value(&value, syntax)
    }

    pub fn from_value(value: &Value, syntax: CoordSyntax) -> Result<SearchTree, TreeError> {
        let trees = value
            .as_object()
            .and_then(|o| o.get("trees"))
            .ok_or_else(|| TreeError::MalformedDocument("expected an object with key `trees`".into()))?
            .as_array()
            .ok_or_else(|| TreeError::MalformedDocument("`trees` must be an array".into()))?;
        if trees.is_empty() {
            return Err(TreeError::EmptyForest);
        }
        let roots = trees
            .iter()
            .map(|n| parse_node(n, syntax))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SearchTree::new(roots))
    }

    /// Canonical extraction document.
    pub fn to_document(&self) -> String {
        let mut out = String::from("{\"trees\": [");
        for (i, n) in self.roots.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write_node(n, &mut out);
        }
        out.push_str("]}");
        out
    }

    pub fn to_value(&self) -> Value {
        fn node(n: &TreeNode) -> Value {
            let mut items = vec![Value::String(n.mv.to_pair())];
            items.extend(n.children.iter().map(node));
            Value::Array(items)
        }
        serde_json::json!({ "trees": self.roots.iter().map(node).collect::<Vec<_>>() })
    }

    pub fn measure(&self) -> TreeMetrics {
        let mut per_depth = Vec::new();
        fn walk(n: &TreeNode, depth: usize, per_depth: &mut Vec<usize>) {
            if per_depth.len() < depth {
                per_depth.push(0);
            }
            per_depth[depth - 1] += 1;
            for c in &n.children {
                walk(c, depth + 1, per_depth);
            }
        }
        for r in &self.roots {
            walk(r, 1, &mut per_depth);
        }
        TreeMetrics {
            size: per_depth.iter().sum(),
            max_depth: per_depth.len(),
            breadth: self.roots.len(),
            per_depth,
        }
    }

    /// Replays every path from `root`, recording cells that could not be
    /// played. Never rejects the tree.
    pub fn validate_against_board(&self, root: &BoardState) -> ValidationReport {
        let mut issues = Vec::new();
        let mut path = Vec::new();
        for n in &self.roots {
            validate_node(n, root, &mut path, &mut issues);
        }
        ValidationReport { issues }
    }
}

fn parse_node(value: &Value, syntax: CoordSyntax) -> Result<TreeNode, TreeError> {
    let items = value
        .as_array()
        .ok_or_else(|| TreeError::MalformedDocument(format!("node must be an array, got {value}")))?;
    let (head, rest) = items
        .split_first()
        .ok_or_else(|| TreeError::MalformedDocument("empty node".into()))?;
    let text = head
        .as_str()
        .ok_or_else(|| TreeError::MalformedDocument(format!("node head must be a string, got {head}")))?;
    let mv = parse_coord(text, syntax)?;
    let children = rest
        .iter()
        .map(|c| parse_node(c, syntax))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TreeNode { mv, children })
}

fn parse_coord(text: &str, syntax: CoordSyntax) -> Result<Coord, TreeError> {
    let inner = match syntax {
        CoordSyntax::AllowTuple => text
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(text),
        CoordSyntax::Strict => text,
    };
    Coord::parse_pair(inner).map_err(|_| TreeError::BadCoordinate(text.to_string()))
}

fn write_node(n: &TreeNode, out: &mut String) {
    out.push_str("[\"");
    out.push_str(&n.mv.to_pair());
    out.push('"');
    for c in &n.children {
        out.push_str(", ");
        write_node(c, out);
    }
    out.push(']');
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TreeMetrics {
    pub size: usize,
    pub max_depth: usize,
    pub breadth: usize,
    /// Node counts at depth 1, 2, ... (index 0 is depth 1).
    pub per_depth: Vec<usize>,
}

impl TreeMetrics {
    pub fn breadth_depth_ratio(&self) -> Option<f64> {
        (self.max_depth > 0).then(|| self.breadth as f64 / self.max_depth as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IssueKind {
    /// The cell was occupied when the path reached it.
    Occupied,
    /// The path continues after a completed four.
    AfterTerminal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Moves from the root down to and including the offending node.
    pub path: Vec<Coord>,
    pub depth: usize,
    pub kind: IssueKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

fn validate_node(
    n: &TreeNode,
    state: &BoardState,
    path: &mut Vec<Coord>,
    issues: &mut Vec<ValidationIssue>,
) {
    path.push(n.mv);
    match state.apply_move(n.mv) {
        Ok(next) => {
            for c in &n.children {
                validate_node(c, &next, path, issues);
            }
        }
        Err(e) => {
            let kind = match e {
                BoardError::TerminalState => IssueKind::AfterTerminal,
                _ => IssueKind::Occupied,
            };
            issues.push(ValidationIssue {
                path: path.clone(),
                depth: path.len(),
                kind,
            });
        }
    }
    path.pop();
}
