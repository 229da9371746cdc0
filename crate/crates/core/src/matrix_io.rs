//! Text formats for matrices.
//!
//! A matrix file has a header line `rows cols` followed by `rows` lines of
//! `cols` space-separated integers. A catalogue file holds several matrices,
//! each introduced by a `[name]` line. Blank lines and lines starting with
//! `#` are ignored everywhere.

use std::fmt::Write as _;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_body<'a, I>(lines: &mut std::iter::Peekable<I>, eof_line: usize) -> Result<IntMatrix>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (hline, header) = lines.next().ok_or_else(|| parse_err(eof_line, "missing header line"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(hline, "header must be `rows cols`"));
    }
    let rows: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad row count `{}`", dims[0])))?;
    let cols: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(hline, format!("bad column count `{}`", dims[1])))?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(hline, "dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(rows);
    for r in 0..rows {
        let (lno, line) = match lines.peek() {
            Some(&(lno, line)) if !line.starts_with('[') => (lno, line),
            Some(&(lno, _)) => return Err(parse_err(lno, format!("expected {rows} rows, found {r}"))),
            None => return Err(parse_err(eof_line, format!("expected {rows} rows, found {r}"))),
        };
        lines.next();
        let row: Vec<BigInt> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(lno, format!("bad integer `{t}`"))))
            .collect::<Result<_>>()?;
        if row.len() != cols {
            return Err(parse_err(lno, format!("expected {cols} entries, found {}", row.len())));
        }
        data.push(row);
    }
    IntMatrix::from_big_rows(data)
}

/// Parses a single matrix.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let eof = text.lines().count().max(1);
    let mut lines = content_lines(text).peekable();
    let m = parse_body(&mut lines, eof)?;
    if let Some((lno, _)) = lines.next() {
        return Err(parse_err(lno, "trailing content after the matrix"));
    }
    Ok(m)
}

/// Parses a catalogue into `(name, matrix)` pairs in file order.
pub fn parse_catalogue(text: &str) -> Result<Vec<(String, IntMatrix)>> {
    let eof = text.lines().count().max(1);
    let mut lines = content_lines(text).peekable();
    let mut out: Vec<(String, IntMatrix)> = Vec::new();
    while let Some((lno, line)) = lines.next() {
        let name = line
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(lno, "expected a `[name]` section header"))?;
        if out.iter().any(|(n, _)| n == name) {
            return Err(parse_err(lno, format!("duplicate name `{name}`")));
        }
        let m = parse_body(&mut lines, eof)?;
        out.push((name.to_string(), m));
    }
    Ok(out)
}

/// Renders a matrix in the file format.
pub fn format_matrix(m: &IntMatrix) -> String {
    let mut s = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}
