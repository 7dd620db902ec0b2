//! Paragraph-level editing of reasoning traces.
//!
//! A trace is split into paragraphs at blank lines, every paragraph carries
//! a label, and a strategy decides which paragraphs to drop. Edits keep the
//! byte spans of every piece so the original can always be rebuilt.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::Coord;

/// Edits removing more than this fraction of the original characters are rejected.
pub const MAX_REMOVAL_FRACTION: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterveneError {
    #[error("paragraph {0} has no label")]
    UnlabeledParagraph(usize),
    #[error("no paragraph belongs to the branch rooted at {0}")]
    UnknownTarget(Coord),
    #[error("label for paragraph {para}: {reason}")]
    InvalidLabel { para: usize, reason: String },
    #[error("malformed label file: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub index: usize,
    /// Byte offsets of the paragraph text in the trace.
    pub start: usize,
    pub end: usize,
    pub text: String,
}

fn separator() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\n[ \t\r]*\n\s*").expect("valid pattern"))
}

/// Splits at blank lines. Whitespace-only pieces are not paragraphs.
pub fn split_paragraphs(trace: &str) -> Vec<Paragraph> {
    let mut out = Vec::new();
    let mut push = |start: usize, end: usize| {
        let text = &trace[start..end];
        if !text.trim().is_empty() {
            out.push(Paragraph {
                index: out.len(),
                start,
                end,
                text: text.to_string(),
            });
        }
    };
    let mut cursor = 0;
    for m in separator().find_iter(trace) {
        push(cursor, m.start());
        cursor = m.end();
    }
    push(cursor, trace.len());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParagraphType {
    Preamble,
    BranchStart,
    BranchAnalysis,
    BranchConclusion,
    Comparison,
    FinalDecision,
    Meta,
}

impl ParagraphType {
    pub fn is_branch(self) -> bool {
        matches!(
            self,
            ParagraphType::BranchStart | ParagraphType::BranchAnalysis | ParagraphType::BranchConclusion
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub coord: Coord,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParagraphLabel {
    pub para: usize,
    #[serde(rename = "type")]
    pub kind: ParagraphType,
    #[serde(default)]
    pub branch_root: Option<Coord>,
    #[serde(default)]
    pub mentions: Vec<Mention>,
}

impl ParagraphLabel {
    pub fn new(para: usize, kind: ParagraphType, branch_root: Option<Coord>, mentions: Vec<Mention>) -> Self {
        ParagraphLabel {
            para,
            kind,
            branch_root,
            mentions,
        }
    }

    fn only_depth(&self, depth: u32) -> bool {
        !self.mentions.is_empty() && self.mentions.iter().all(|m| m.depth == depth)
    }
}

/// Reads a JSON array of labels.
pub fn parse_labels(text: &str) -> Result<Vec<ParagraphLabel>, InterveneError> {
    serde_json::from_str(text).map_err(|e| InterveneError::Malformed(e.to_string()))
}

/// Checks that labels cover paragraphs `0..n` once each and are consistent.
/// Returns the labels ordered by paragraph.
pub fn validate_labels(labels: &[ParagraphLabel], n_paragraphs: usize) -> Result<Vec<ParagraphLabel>, InterveneError> {
    let mut by_para: BTreeMap<usize, &ParagraphLabel> = BTreeMap::new();
    for l in labels {
        let invalid = |reason: &str| InterveneError::InvalidLabel {
            para: l.para,
            reason: reason.into(),
        };
        if l.para >= n_paragraphs {
            return Err(invalid("no such paragraph"));
        }
        if by_para.insert(l.para, l).is_some() {
            return Err(invalid("labelled twice"));
        }
        if l.kind.is_branch() != l.branch_root.is_some() {
            return Err(invalid("branch_root must be present exactly for branch paragraphs"));
        }
        if l.mentions.iter().any(|m| m.depth < 1) {
            return Err(invalid("mention depth must be at least 1"));
        }
    }
    if let Some(missing) = (0..n_paragraphs).find(|i| !by_para.contains_key(i)) {
        return Err(InterveneError::UnlabeledParagraph(missing));
    }
    Ok(by_para.into_values().cloned().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "target", rename_all = "kebab-case")]
pub enum EditStrategy {
    RemoveFinalDecision,
    RemoveFinalPlusBranch(Coord),
    AddBackDepth1(Coord),
    AddBackDepth1And2(Coord),
}

impl EditStrategy {
    pub fn target(self) -> Option<Coord> {
        match self {
            EditStrategy::RemoveFinalDecision => None,
            EditStrategy::RemoveFinalPlusBranch(t) | EditStrategy::AddBackDepth1(t) | EditStrategy::AddBackDepth1And2(t) => {
                Some(t)
            }
        }
    }
}

impl fmt::Display for EditStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EditStrategy::RemoveFinalDecision => f.write_str("fd"),
            EditStrategy::RemoveFinalPlusBranch(t) => write!(f, "fd+branch:{}", t.to_pair()),
            EditStrategy::AddBackDepth1(t) => write!(f, "addback-d1:{}", t.to_pair()),
            EditStrategy::AddBackDepth1And2(t) => write!(f, "addback-d12:{}", t.to_pair()),
        }
    }
}

impl FromStr for EditStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, target) = match s.split_once(':') {
            Some((n, t)) => (n, Some(Coord::parse_pair(t).map_err(|e| e.to_string())?)),
            None => (s, None),
        };
        let need = || target.ok_or_else(|| format!("strategy `{name}` needs a target, e.g. `{name}:1,4`"));
        match name {
            "fd" => Ok(EditStrategy::RemoveFinalDecision),
            "fd+branch" => Ok(EditStrategy::RemoveFinalPlusBranch(need()?)),
            "addback-d1" => Ok(EditStrategy::AddBackDepth1(need()?)),
            "addback-d12" => Ok(EditStrategy::AddBackDepth1And2(need()?)),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// Whether `text` names `c` as `r,c`, `(r, c)` or `m r c`.
fn text_mentions(text: &str, c: Coord) -> bool {
    let (r, col) = (c.row(), c.col());
    let pattern = format!(r"(?:^|[^\d])(?:{r}\s*,\s*{col}|m\s+{r}\s+{col})(?:[^\d]|$)");
    Regex::new(&pattern).expect("valid pattern").is_match(text)
}

/// Indices of paragraphs the strategy removes.
pub fn removed_paragraphs(
    paragraphs: &[Paragraph],
    labels: &[ParagraphLabel],
    strategy: EditStrategy,
) -> Result<Vec<usize>, InterveneError> {
    let labels = validate_labels(labels, paragraphs.len())?;
    let target = strategy.target();
    if let Some(t) = target {
        if !labels.iter().any(|l| l.branch_root == Some(t)) {
            return Err(InterveneError::UnknownTarget(t));
        }
    }
    let removed = labels
        .iter()
        .filter(|l| {
            if l.kind == ParagraphType::FinalDecision {
                return true;
            }
            let Some(t) = target else { return false };
            let in_branch = l.branch_root == Some(t);
            let comparison = l.kind == ParagraphType::Comparison
                && (l.mentions.iter().any(|m| m.coord == t) || text_mentions(&paragraphs[l.para].text, t));
            if !(in_branch || comparison) {
                return false;
            }
            let restored = l.kind.is_branch()
                && match strategy {
                    EditStrategy::AddBackDepth1(_) => l.only_depth(1),
                    EditStrategy::AddBackDepth1And2(_) => l.only_depth(1) || l.only_depth(2),
                    _ => false,
                };
            !restored
        })
        .map(|l| l.para)
        .collect();
    Ok(removed)
}

/// A contiguous byte range of the original trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub start: usize,
    pub end: usize,
    pub removed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditedTrace {
    pub original: String,
    /// The edited text, or None when the edit was rejected.
    pub edited: Option<String>,
    pub strategy: EditStrategy,
    pub removed_paragraphs: Vec<usize>,
    /// Removed characters over original characters.
    pub removal_fraction: f64,
    pub rejected: bool,
    /// Cover of the original in order; removed neighbours are merged.
    pub pieces: Vec<Piece>,
}

impl EditedTrace {
    /// Concatenates every piece, kept or removed.
    pub fn reconstruct(&self) -> String {
        self.pieces.iter().map(|p| &self.original[p.start..p.end]).collect()
    }

    /// Concatenation of the kept pieces before whitespace is tidied.
    pub fn kept_raw(&self) -> String {
        self.pieces
            .iter()
            .filter(|p| !p.removed)
            .map(|p| &self.original[p.start..p.end])
            .collect()
    }
}

fn collapse_newlines() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\n{3,}").expect("valid pattern"))
}

/// Applies `strategy` to `trace`.
pub fn apply_strategy(
    trace: &str,
    labels: &[ParagraphLabel],
    strategy: EditStrategy,
) -> Result<EditedTrace, InterveneError> {
    let paragraphs = split_paragraphs(trace);
    let removed = removed_paragraphs(&paragraphs, labels, strategy)?;

    // Each paragraph owns the bytes up to the next paragraph's start; the
    // first also owns any leading whitespace.
    let mut pieces: Vec<Piece> = Vec::new();
    for (i, p) in paragraphs.iter().enumerate() {
        let start = if i == 0 { 0 } else { p.start };
        let end = paragraphs.get(i + 1).map_or(trace.len(), |n| n.start);
        let is_removed = removed.contains(&i);
        match pieces.last_mut() {
            Some(last) if last.removed == is_removed => last.end = end,
            _ => pieces.push(Piece {
                start,
                end,
                removed: is_removed,
            }),
        }
    }
    if pieces.is_empty() && !trace.is_empty() {
        pieces.push(Piece {
            start: 0,
            end: trace.len(),
            removed: false,
        });
    }

    let total = trace.chars().count();
    let removed_chars: usize = pieces
        .iter()
        .filter(|p| p.removed)
        .map(|p| trace[p.start..p.end].chars().count())
        .sum();
    let removal_fraction = if total == 0 { 0.0 } else { removed_chars as f64 / total as f64 };
    let rejected = removal_fraction > MAX_REMOVAL_FRACTION;
    let mut out = EditedTrace {
        original: trace.to_string(),
        edited: None,
        strategy,
        removed_paragraphs: removed,
        removal_fraction,
        rejected,
        pieces,
    };
    if !rejected {
        let joined = out.kept_raw();
        let collapsed = collapse_newlines().replace_all(&joined, "\n\n");
        out.edited = Some(collapsed.trim_end().to_string());
    }
    Ok(out)
}

/// The branch root other than `chosen` with the most paragraphs; ties go to
/// the branch whose first paragraph comes first.
pub fn largest_unchosen_branch(labels: &[ParagraphLabel], chosen: Coord) -> Option<Coord> {
    let mut sizes: Vec<(Coord, usize, usize)> = Vec::new();
    let mut sorted: Vec<&ParagraphLabel> = labels.iter().collect();
    sorted.sort_by_key(|l| l.para);
    for l in sorted {
        let Some(root) = l.branch_root.filter(|&r| r != chosen) else { continue };
        match sizes.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) => entry.1 += 1,
            None => sizes.push((root, 1, l.para)),
        }
    }
    sizes
        .into_iter()
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)))
        .map(|(r, _, _)| r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerunOutcome {
    pub original_move: Coord,
    pub new_move: Coord,
    /// First-ply candidates of the original tree.
    pub candidates: Vec<Coord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeRates {
    pub n: usize,
    pub changed: usize,
    /// Fraction of outcomes whose move changed; None without outcomes.
    pub rate: Option<f64>,
    /// Fraction of changed moves that were other original candidates; None
    /// when nothing changed.
    pub in_tree_rate: Option<f64>,
}

pub fn change_rate(outcomes: &[RerunOutcome]) -> ChangeRates {
    let changed: Vec<&RerunOutcome> = outcomes.iter().filter(|o| o.new_move != o.original_move).collect();
    let in_tree = changed.iter().filter(|o| o.candidates.contains(&o.new_move)).count();
    ChangeRates {
        n: outcomes.len(),
        changed: changed.len(),
        rate: (!outcomes.is_empty()).then(|| changed.len() as f64 / outcomes.len() as f64),
        in_tree_rate: (!changed.is_empty()).then(|| in_tree as f64 / changed.len() as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ParagraphType::*;

    #[test]
    fn splitting() {
        assert_eq!(split_paragraphs("A\n\nB\n\nC").len(), 3);
        assert_eq!(split_paragraphs("A\n\nB\n\n").len(), 2);
        assert_eq!(split_paragraphs("A\nB").len(), 1);
        let p = split_paragraphs("  A\n \n\nBB\n");
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].text, "BB\n");
        assert_eq!(&"  A\n \n\nBB\n"[p[1].start..p[1].end], "BB\n");
    }

    #[test]
    fn raw_text_coordinate_forms() {
        let c = Coord::at(1, 4);
        assert!(text_mentions("compare (1, 4) with the rest", c));
        assert!(text_mentions("1,4 is better", c));
        assert!(text_mentions("play m 1 4", c));
        assert!(!text_mentions("11,4 or 1,45", c));
    }

    #[test]
    fn strategy_names_roundtrip() {
        for s in [
            EditStrategy::RemoveFinalDecision,
            EditStrategy::RemoveFinalPlusBranch(Coord::at(1, 4)),
            EditStrategy::AddBackDepth1(Coord::at(0, 0)),
            EditStrategy::AddBackDepth1And2(Coord::at(3, 8)),
        ] {
            assert_eq!(s.to_string().parse::<EditStrategy>().unwrap(), s);
        }
        assert!("fd+branch".parse::<EditStrategy>().is_err());
    }

    #[test]
    fn label_validation() {
        let root = Some(Coord::at(1, 4));
        let ok = vec![
            ParagraphLabel::new(1, BranchStart, root, vec![]),
            ParagraphLabel::new(0, Preamble, None, vec![]),
        ];
        assert_eq!(validate_labels(&ok, 2).unwrap()[0].para, 0);
        assert_eq!(validate_labels(&ok, 3), Err(InterveneError::UnlabeledParagraph(2)));
        let bad = vec![ParagraphLabel::new(0, Comparison, root, vec![])];
        assert!(matches!(validate_labels(&bad, 1), Err(InterveneError::InvalidLabel { .. })));
        let json = r#"[{"para": 0, "type": "BRANCH_START", "branch_root": "1,4",
                        "mentions": [{"coord": "1,4", "depth": 1}]}]"#;
        let parsed = parse_labels(json).unwrap();
        assert_eq!(parsed[0].mentions[0], Mention { coord: Coord::at(1, 4), depth: 1 });
    }

    #[test]
    fn rates() {
        let same = RerunOutcome {
            original_move: Coord::at(0, 0),
            new_move: Coord::at(0, 0),
            candidates: vec![Coord::at(0, 0), Coord::at(1, 1)],
        };
        let mut outcomes = vec![same.clone(); 98];
        outcomes.push(RerunOutcome {
            new_move: Coord::at(1, 1),
            ..same.clone()
        });
        outcomes.push(RerunOutcome {
            new_move: Coord::at(2, 2),
            ..same
        });
        let r = change_rate(&outcomes);
        assert_eq!(r.rate, Some(0.02));
        assert_eq!(r.in_tree_rate, Some(0.5));
        let empty = change_rate(&[]);
        assert_eq!((empty.rate, empty.in_tree_rate), (None, None));
    }

    #[test]
    fn largest_branch_ties_to_earliest() {
        let a = Some(Coord::at(0, 1));
        let b = Some(Coord::at(2, 2));
        let chosen = Coord::at(1, 4);
        let labels = vec![
            ParagraphLabel::new(0, BranchStart, Some(chosen), vec![]),
            ParagraphLabel::new(1, BranchStart, b, vec![]),
            ParagraphLabel::new(2, BranchStart, a, vec![]),
            ParagraphLabel::new(3, BranchAnalysis, a, vec![]),
            ParagraphLabel::new(4, BranchAnalysis, b, vec![]),
            ParagraphLabel::new(5, BranchAnalysis, Some(chosen), vec![]),
            ParagraphLabel::new(6, BranchAnalysis, Some(chosen), vec![]),
        ];
        assert_eq!(largest_unchosen_branch(&labels, chosen), b);
        assert_eq!(largest_unchosen_branch(&labels[..1], chosen), None);
    }
}
