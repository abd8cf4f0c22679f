//! Line-oriented plan documents.
//!
//! ```text
//! node <id> <X> <Y> <vl> <vh>
//! edge <from> <to> line
//! edge <from> <to> arc <curvature>
//! start <id>
//! terminal <id>
//! ```
//!
//! `#` starts a comment; fields are separated by whitespace.

use std::fmt::Write as _;

use safenet_core::plan::{EdgeKind, EdgeSpec, Node, PlanError, PlanGraph};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlanFileError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: PlanError },
    #[error(transparent)]
    Graph(PlanError),
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in body.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token { text: &body[s..i], col: body[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &body[s..], col: body[..s].chars().count() + 1 });
    }
    out
}

/// Plain decimal with optional sign, fraction and exponent. Rejects the
/// `inf`/`nan` spellings that `f64::from_str` would accept.
fn is_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if matches!(b.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

fn number(line: usize, tok: &Token<'_>) -> Result<f64, PlanFileError> {
    let bad = || PlanFileError::Syntax { line, col: tok.col, msg: format!("expected a number, found {:?}", tok.text) };
    if !is_decimal(tok.text) {
        return Err(bad());
    }
    tok.text.parse().map_err(|_| bad())
}

fn expect_len(line: usize, toks: &[Token<'_>], n: usize, usage: &str) -> Result<(), PlanFileError> {
    if toks.len() == n {
        return Ok(());
    }
    let col = toks.get(n).map_or_else(|| toks.last().map_or(1, |t| t.col + t.text.len()), |t| t.col);
    Err(PlanFileError::Syntax { line, col, msg: format!("expected `{usage}`") })
}

pub fn parse_plan(text: &str) -> Result<PlanGraph, PlanFileError> {
    let mut nodes = Vec::new();
    let mut node_lines = Vec::new();
    let mut edges = Vec::new();
    let mut edge_lines = Vec::new();
    let mut start: Option<String> = None;
    let mut terminals = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        match head.text {
            "node" => {
                expect_len(line, &toks, 6, "node <id> <X> <Y> <vl> <vh>")?;
                let v: Vec<f64> = toks[2..].iter().map(|t| number(line, t)).collect::<Result<_, _>>()?;
                nodes.push(Node::new(toks[1].text, v[0], v[1], v[2], v[3]));
                node_lines.push(line);
            }
            "edge" => {
                if toks.len() < 4 {
                    expect_len(line, &toks, 4, "edge <from> <to> line|arc <curvature>")?;
                }
                let kind = match toks[3].text {
                    "line" => {
                        expect_len(line, &toks, 4, "edge <from> <to> line")?;
                        EdgeKind::Line
                    }
                    "arc" => {
                        expect_len(line, &toks, 5, "edge <from> <to> arc <curvature>")?;
                        EdgeKind::Arc(number(line, &toks[4])?)
                    }
                    other => {
                        return Err(PlanFileError::Syntax {
                            line,
                            col: toks[3].col,
                            msg: format!("unknown edge kind {other:?}, expected `line` or `arc`"),
                        })
                    }
                };
                edges.push(EdgeSpec::new(toks[1].text, toks[2].text, kind));
                edge_lines.push(line);
            }
            "start" => {
                expect_len(line, &toks, 2, "start <id>")?;
                if start.is_some() {
                    return Err(PlanFileError::Syntax { line, col: head.col, msg: "duplicate `start`".into() });
                }
                start = Some(toks[1].text.to_string());
            }
            "terminal" => {
                expect_len(line, &toks, 2, "terminal <id>")?;
                terminals.push(toks[1].text.to_string());
            }
            other => {
                return Err(PlanFileError::Syntax { line, col: head.col, msg: format!("unknown directive {other:?}") })
            }
        }
    }

    let start = start.ok_or(PlanFileError::Graph(PlanError::MissingStart))?;
    PlanGraph::new(nodes, &edges, &start, &terminals).map_err(|e| {
        let line = match &e {
            PlanError::NonFinite { node } | PlanError::SpeedInterval { node, .. } => Some(node_lines[*node]),
            PlanError::UnknownNode { edge: Some(i), .. }
            | PlanError::ZeroCurvature { edge: i }
            | PlanError::DegenerateEdge { edge: i }
            | PlanError::NotCoCircular { edge: i, .. } => Some(edge_lines[*i]),
            _ => None,
        };
        match line {
            Some(line) => PlanFileError::Invalid { line, source: e },
            None => PlanFileError::Graph(e),
        }
    })
}

/// Renders a graph so that [`parse_plan`] reproduces it exactly.
pub fn serialize_plan(g: &PlanGraph) -> String {
    let mut s = String::new();
    for n in g.nodes() {
        let _ = writeln!(s, "node {} {} {} {} {}", n.id, n.x, n.y, n.vl, n.vh);
    }
    for e in g.edge_specs() {
        match e.kind {
            EdgeKind::Line => {
                let _ = writeln!(s, "edge {} {} line", e.from, e.to);
            }
            EdgeKind::Arc(k) => {
                let _ = writeln!(s, "edge {} {} arc {}", e.from, e.to, k);
            }
        }
    }
    let _ = writeln!(s, "start {}", g.nodes()[g.start()].id);
    for &t in g.terminals() {
        let _ = writeln!(s, "terminal {}", g.nodes()[t].id);
    }
    s
}
