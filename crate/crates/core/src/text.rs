//! Line-oriented text format for structures.
//!
//! ```text
//! # a three-element chain
//! node a
//! node b
//! lt a b
//! inc a b
//! ```
//!
//! Everything after `#` on a line is ignored. Node lines must be unique;
//! repeated edge lines are accepted and collapse to one edge. Edges may
//! mention nodes declared later in the file.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::structure::{ConstraintStructure, EdgeKind, StructureBuilder};

pub fn parse_structure(input: &str) -> Result<ConstraintStructure> {
    let mut builder = StructureBuilder::new();
    let mut edges = Vec::new();
    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| Error::Parse { line: line_no, message };
        match words.as_slice() {
            ["node", label] => {
                builder.add_node(label).map_err(|e| err(e.to_string()))?;
            }
            ["lt", a, b] => edges.push((line_no, EdgeKind::Lt, a.to_string(), b.to_string())),
            ["inc", a, b] => edges.push((line_no, EdgeKind::Inc, a.to_string(), b.to_string())),
            [kw @ ("node" | "lt" | "inc"), ..] => {
                return Err(err(format!("wrong number of arguments for `{kw}`")));
            }
            [other, ..] => return Err(err(format!("unknown directive `{other}`"))),
            [] => unreachable!(),
        }
    }
    for (line, kind, a, b) in edges {
        builder
            .edge_by_label(kind, &a, &b)
            .map_err(|e| Error::Parse { line, message: e.to_string() })?;
    }
    Ok(builder.build())
}

pub fn write_structure(s: &ConstraintStructure) -> String {
    let mut out = String::new();
    for id in s.nodes() {
        writeln!(out, "node {}", s.label(id)).unwrap();
    }
    for (a, b) in s.lt_edges() {
        writeln!(out, "lt {} {}", s.label(a), s.label(b)).unwrap();
    }
    for (a, b) in s.inc_edges() {
        writeln!(out, "inc {} {}", s.label(a), s.label(b)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_duplicate_edges() {
        let s = parse_structure(
            "# cycle\nnode a\nnode b  # trailing\nnode c\nlt a b\nlt a b\nlt b c\nlt c a\n\ninc a c\n",
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.lt_count(), 3);
        assert_eq!(s.inc_count(), 1);
    }

    #[test]
    fn forward_references_are_allowed() {
        let s = parse_structure("lt x y\nnode x\nnode y\n").unwrap();
        assert!(s.has_lt(s.node("x").unwrap(), s.node("y").unwrap()));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse_structure("node a\nnode a\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_structure("node a\nlt a b\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_structure("edge a b\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_structure("node\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_structure("lt a\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_parse_is_identity() {
        let s = ConstraintStructure::from_labels(&["p", "q", "r"], &[("p", "q")], &[("q", "r"), ("r", "q")]).unwrap();
        assert_eq!(parse_structure(&write_structure(&s)).unwrap(), s);
    }
}
