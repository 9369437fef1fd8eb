//! Plain-text instance format.
//!
//! ```text
//! # comment
//! n m k
//! u v          (m edge lines, 0-based)
//! t1 t2 ... tk (one line of terminal ids; omitted when k = 0)
//! ```
//!
//! Blank lines and everything after a `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, TerminalSet, Vertex};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn numbers(line_no: usize, text: &str) -> Result<Vec<u64>> {
    text.split_whitespace()
        .map(|tok| tok.parse::<u64>().map_err(|_| parse_err(line_no, format!("not an integer: {tok:?}"))))
        .collect()
}

pub fn parse_instance(text: &str) -> Result<(Graph, TerminalSet)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hdr_line, hdr) = lines.next().ok_or_else(|| parse_err(1, "missing `n m k` header"))?;
    let header = numbers(hdr_line, hdr)?;
    let [n, m, k] = header[..] else {
        return Err(parse_err(hdr_line, "header must be `n m k`"));
    };
    let (n, m, k) = (n as usize, m as usize, k as usize);
    if k > n {
        return Err(parse_err(hdr_line, format!("k={k} exceeds n={n}")));
    }

    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) = lines.next().ok_or_else(|| parse_err(hdr_line, format!("expected {m} edge lines")))?;
        match numbers(no, line)?[..] {
            [a, b] if a < n as u64 && b < n as u64 => edges.push((a as Vertex, b as Vertex)),
            [_, _] => return Err(parse_err(no, format!("edge endpoint outside 0..{n}"))),
            _ => return Err(parse_err(no, "edge line must be `u v`")),
        }
    }
    let graph = Graph::new(n, edges)?;

    let terminals = if k == 0 {
        Vec::new()
    } else {
        let (no, line) = lines.next().ok_or_else(|| parse_err(hdr_line, "missing terminal line"))?;
        let ids = numbers(no, line)?;
        if ids.len() != k {
            return Err(parse_err(no, format!("expected {k} terminal ids, found {}", ids.len())));
        }
        if let Some(bad) = ids.iter().find(|&&t| t >= n as u64) {
            return Err(parse_err(no, format!("terminal {bad} outside 0..{n}")));
        }
        ids.into_iter().map(|t| t as Vertex).collect()
    };
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, "unexpected trailing content"));
    }
    let u = TerminalSet::new(n, terminals)?;
    if u.len() != k {
        return Err(parse_err(hdr_line, "terminal ids must be distinct"));
    }
    Ok((graph, u))
}

pub fn write_instance(g: &Graph, u: &TerminalSet) -> String {
    let mut out = String::new();
    writeln!(out, "{} {} {}", g.n(), g.m(), u.len()).unwrap();
    for &(a, b) in g.edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    if !u.is_empty() {
        let ids: Vec<String> = u.iter().map(|t| t.to_string()).collect();
        writeln!(out, "{}", ids.join(" ")).unwrap();
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<(Graph, TerminalSet)> {
    parse_instance(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let text = "# a path\n3 2 2\n\n0 1  # first\n1 2\n0 2\n";
        let (g, u) = parse_instance(text).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(u.as_slice(), &[0, 2]);
    }

    #[test]
    fn zero_terminals_need_no_line() {
        let (g, u) = parse_instance("2 1 0\n0 1\n").unwrap();
        assert_eq!(g.m(), 1);
        assert!(u.is_empty());
    }

    #[test]
    fn roundtrip() {
        let g = Graph::new(5, [(0, 1), (1, 2), (3, 4), (0, 4)]).unwrap();
        let u = TerminalSet::new(5, [4, 0, 2]).unwrap();
        let (g2, u2) = parse_instance(&write_instance(&g, &u)).unwrap();
        assert_eq!((g, u), (g2, u2));
    }

    #[test]
    fn reports_line_numbers() {
        match parse_instance("3 2 1\n0 1\n1 x\n0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_instance("3 1 1\n0 1\n0 1\n").is_err());
        assert!(parse_instance("3 1 2\n0 1\n0\n").is_err());
        assert!(parse_instance("3 1 1\n0 5\n0\n").is_err());
    }
}
