//! The line-oriented instance and solution formats.
//!
//! ```text
//! c <comment>
//! p <fads|fadl> <n> <m> <k>
//! l <v> <F|M>
//! a <u> <v>
//! ```
//!
//! Vertices are 1-based. Emitted files list labels and arcs sorted, with LF
//! line endings. Solution files hold `a` lines for the deleted arcs and `l`
//! lines for the complete labeling.

use std::fmt::Write as _;

use fads_core::{Arc, Digraph, FadlInstance, FadsInstance, Label, Labeling, Solution, VertexId};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct FormatError {
    pub line: usize,
    pub kind: FormatErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatErrorKind {
    #[error("missing problem line")]
    MissingHeader,
    #[error("second problem line")]
    RepeatedHeader,
    #[error("{0} line before the problem line")]
    BeforeHeader(char),
    #[error("unknown problem tag {0:?}")]
    UnknownTag(String),
    #[error("unknown line type {0:?}")]
    UnknownLine(String),
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error("invalid label {0:?}")]
    BadLabel(String),
    #[error("vertex {vertex} outside 1..={n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate arc {0} {1}")]
    DuplicateArc(usize, usize),
    #[error("vertex {0} labeled twice")]
    DuplicateLabel(usize),
    #[error("label line in an unlabeled (fads) file")]
    LabelInFads,
    #[error("header announces {announced} arcs but {found} arc lines follow")]
    ArcCount { announced: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Fads,
    Fadl,
}

impl Problem {
    pub fn tag(self) -> &'static str {
        match self {
            Problem::Fads => "fads",
            Problem::Fadl => "fadl",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedInstance {
    Fads(FadsInstance),
    Fadl(FadlInstance),
}

impl ParsedInstance {
    pub fn problem(&self) -> Problem {
        match self {
            ParsedInstance::Fads(_) => Problem::Fads,
            ParsedInstance::Fadl(_) => Problem::Fadl,
        }
    }

    pub fn digraph(&self) -> &Digraph {
        match self {
            ParsedInstance::Fads(i) => &i.digraph,
            ParsedInstance::Fadl(i) => &i.digraph,
        }
    }

    /// The labeled view; an unlabeled instance gets the empty labeling.
    pub fn to_fadl(&self) -> FadlInstance {
        match self {
            ParsedInstance::Fads(i) => fads_core::from_fads(i),
            ParsedInstance::Fadl(i) => i.clone(),
        }
    }
}

fn err(line: usize, kind: FormatErrorKind) -> FormatError {
    FormatError { line, kind }
}

fn number(line: usize, tok: &str) -> Result<usize, FormatError> {
    tok.parse::<usize>()
        .map_err(|_| err(line, FormatErrorKind::BadNumber(tok.to_string())))
}

fn vertex(line: usize, tok: &str, n: usize) -> Result<VertexId, FormatError> {
    let v = number(line, tok)?;
    if v == 0 || v > n {
        return Err(err(line, FormatErrorKind::OutOfRange { vertex: v, n }));
    }
    Ok(VertexId(v - 1))
}

fn label(line: usize, tok: &str) -> Result<Label, FormatError> {
    match tok {
        "F" => Ok(Label::Fork),
        "M" => Ok(Label::Merge),
        _ => Err(err(line, FormatErrorKind::BadLabel(tok.to_string()))),
    }
}

fn fields(line: usize, toks: &[&str], expected: usize) -> Result<(), FormatError> {
    if toks.len() == expected {
        Ok(())
    } else {
        Err(err(
            line,
            FormatErrorKind::FieldCount {
                expected,
                found: toks.len(),
            },
        ))
    }
}

/// Non-comment, non-blank lines with 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.first() {
            None | Some(&"c") => None,
            Some(_) => Some((i + 1, toks)),
        }
    })
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance, FormatError> {
    let mut header: Option<(Problem, usize, usize, usize)> = None;
    let mut arcs: Vec<(VertexId, VertexId)> = Vec::new();
    let mut labeling = Labeling::new();
    let mut last_line = 0;
    let mut d: Option<Digraph> = None;
    for (line, toks) in records(text) {
        last_line = line;
        match toks[0] {
            "p" => {
                if header.is_some() {
                    return Err(err(line, FormatErrorKind::RepeatedHeader));
                }
                fields(line, &toks, 5)?;
                let problem = match toks[1] {
                    "fads" => Problem::Fads,
                    "fadl" => Problem::Fadl,
                    t => return Err(err(line, FormatErrorKind::UnknownTag(t.to_string()))),
                };
                let n = number(line, toks[2])?;
                let m = number(line, toks[3])?;
                let k = number(line, toks[4])?;
                header = Some((problem, n, m, k));
                d = Some(Digraph::new(n));
            }
            "l" | "a" => {
                let first = toks[0].chars().next().unwrap();
                let Some((problem, n, _, _)) = header else {
                    return Err(err(line, FormatErrorKind::BeforeHeader(first)));
                };
                fields(line, &toks, 3)?;
                let u = vertex(line, toks[1], n)?;
                if first == 'l' {
                    if problem == Problem::Fads {
                        return Err(err(line, FormatErrorKind::LabelInFads));
                    }
                    let l = label(line, toks[2])?;
                    if labeling.set(u, l).is_some() {
                        return Err(err(line, FormatErrorKind::DuplicateLabel(u.0 + 1)));
                    }
                } else {
                    let v = vertex(line, toks[2], n)?;
                    if u == v {
                        return Err(err(line, FormatErrorKind::SelfLoop(u.0 + 1)));
                    }
                    let g = d.as_mut().unwrap();
                    if g.has_arc(u, v) {
                        return Err(err(line, FormatErrorKind::DuplicateArc(u.0 + 1, v.0 + 1)));
                    }
                    g.add_arc(u, v).expect("checked");
                    arcs.push((u, v));
                }
            }
            other => return Err(err(line, FormatErrorKind::UnknownLine(other.to_string()))),
        }
    }
    let Some((problem, _, m, k)) = header else {
        return Err(err(last_line.max(1), FormatErrorKind::MissingHeader));
    };
    if arcs.len() != m {
        return Err(err(
            last_line,
            FormatErrorKind::ArcCount {
                announced: m,
                found: arcs.len(),
            },
        ));
    }
    let d = d.unwrap();
    Ok(match problem {
        Problem::Fads => ParsedInstance::Fads(FadsInstance::new(d, k)),
        Problem::Fadl => ParsedInstance::Fadl(FadlInstance::new(d, labeling, k as i64).expect("labels in range")),
    })
}

/// Renumbers live vertices densely so ids are `1..=n`.
fn dense(d: &Digraph) -> (Digraph, Vec<Option<VertexId>>) {
    d.compact()
}

fn emit(problem: Problem, d: &Digraph, labeling: &Labeling, k: i64, comments: &[String]) -> String {
    let (g, map) = dense(d);
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(
        out,
        "p {} {} {} {}",
        problem.tag(),
        g.vertex_count(),
        g.arc_count(),
        k.max(0)
    );
    if problem == Problem::Fadl {
        let mut labels: Vec<(VertexId, Label)> = labeling
            .iter()
            .filter_map(|(v, l)| map.get(v.0).copied().flatten().map(|nv| (nv, l)))
            .collect();
        labels.sort_unstable();
        for (v, l) in labels {
            let _ = writeln!(out, "l {} {}", v.0 + 1, l.as_char());
        }
    }
    for a in g.arcs() {
        let _ = writeln!(out, "a {} {}", a.tail.0 + 1, a.head.0 + 1);
    }
    out
}

pub fn emit_fads(instance: &FadsInstance, comments: &[String]) -> String {
    emit(
        Problem::Fads,
        &instance.digraph,
        &Labeling::new(),
        instance.budget as i64,
        comments,
    )
}

pub fn emit_fadl(instance: &FadlInstance, comments: &[String]) -> String {
    emit(
        Problem::Fadl,
        &instance.digraph,
        &instance.labeling,
        instance.budget,
        comments,
    )
}

pub fn emit_parsed(instance: &ParsedInstance, comments: &[String]) -> String {
    match instance {
        ParsedInstance::Fads(i) => emit_fads(i, comments),
        ParsedInstance::Fadl(i) => emit_fadl(i, comments),
    }
}

/// Writes a solution with the instance's own (1-based) vertex ids.
pub fn emit_solution(solution: &Solution) -> String {
    let mut out = String::new();
    let mut arcs = solution.deleted_arcs.clone();
    arcs.sort_unstable();
    for a in arcs {
        let _ = writeln!(out, "a {} {}", a.tail.0 + 1, a.head.0 + 1);
    }
    for (v, l) in solution.labeling.iter() {
        let _ = writeln!(out, "l {} {}", v.0 + 1, l.as_char());
    }
    out
}

/// Parses a solution file. Ids are range-checked against `n`; whether arcs
/// exist is left to verification. Repeated arcs are kept so verification can
/// reject them.
pub fn parse_solution(text: &str, n: usize) -> Result<Solution, FormatError> {
    let mut deleted_arcs = Vec::new();
    let mut labeling = Labeling::new();
    for (line, toks) in records(text) {
        match toks[0] {
            "a" => {
                fields(line, &toks, 3)?;
                let u = vertex(line, toks[1], n)?;
                let v = vertex(line, toks[2], n)?;
                deleted_arcs.push(Arc::new(u, v));
            }
            "l" => {
                fields(line, &toks, 3)?;
                let v = vertex(line, toks[1], n)?;
                if labeling.set(v, label(line, toks[2])?).is_some() {
                    return Err(err(line, FormatErrorKind::DuplicateLabel(v.0 + 1)));
                }
            }
            // Status and value lines written by `solve` are informational.
            "s" | "o" => {}
            other => return Err(err(line, FormatErrorKind::UnknownLine(other.to_string()))),
        }
    }
    Ok(Solution {
        deleted_arcs,
        labeling,
    })
}

/// Plain DOT export; Fork vertices are boxes, Merge vertices ellipses.
pub fn to_dot(instance: &ParsedInstance) -> String {
    let fadl = instance.to_fadl();
    let (g, map) = dense(&fadl.digraph);
    let mut out = String::from("digraph instance {\n");
    for v in fadl.digraph.vertices() {
        let nv = map[v.0].unwrap().0 + 1;
        let shape = match fadl.labeling.get(v) {
            Some(Label::Fork) => " [shape=box]",
            Some(Label::Merge) => " [shape=ellipse, style=filled]",
            None => "",
        };
        let _ = writeln!(out, "  {nv}{shape};");
    }
    for a in g.arcs() {
        let _ = writeln!(out, "  {} -> {};", a.tail.0 + 1, a.head.0 + 1);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle() {
        let p = parse_instance("p fads 3 3 1\na 1 2\na 2 3\na 3 1\n").unwrap();
        let ParsedInstance::Fads(i) = p else { panic!() };
        assert_eq!((i.digraph.arc_count(), i.budget), (3, 1));
    }

    #[test]
    fn labeled() {
        let p = parse_instance("c x\np fadl 2 1 0\nl 1 F\na 1 2\n").unwrap();
        let ParsedInstance::Fadl(i) = p else { panic!() };
        assert_eq!(i.labeling.get(VertexId(0)), Some(Label::Fork));
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let e = parse_instance("p fads 2 2 0\na 1 2\na 1 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.kind, FormatErrorKind::DuplicateArc(1, 2));
        let e = parse_instance("p fads 2 1 0\na 1 1\n").unwrap_err();
        assert_eq!(e.kind, FormatErrorKind::SelfLoop(1));
        let e = parse_instance("p fads 2 0 0\nl 1 F\n").unwrap_err();
        assert_eq!(e.kind, FormatErrorKind::LabelInFads);
        let e = parse_instance("p fads 2 1 0\na 1 3\n").unwrap_err();
        assert_eq!(e.kind, FormatErrorKind::OutOfRange { vertex: 3, n: 2 });
        let e = parse_instance("a 1 2\n").unwrap_err();
        assert_eq!(e.kind, FormatErrorKind::BeforeHeader('a'));
        let e = parse_instance("p fads 2 2 0\na 1 2\n").unwrap_err();
        assert!(matches!(e.kind, FormatErrorKind::ArcCount { .. }));
        assert!(parse_instance("").is_err());
    }

    #[test]
    fn emit_sorts() {
        let p = parse_instance("p fadl 3 2 1\na 2 3\nl 3 M\na 1 2\nl 1 F\n").unwrap();
        assert_eq!(
            emit_parsed(&p, &[]),
            "p fadl 3 2 1\nl 1 F\nl 3 M\na 1 2\na 2 3\n"
        );
    }
}
