//! Small helpers shared by the tab-separated file formats.

use std::io::BufRead;

use thiserror::Error;

use crate::ntriples::Iri;

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("row {row}: {reason}")]
    Malformed { row: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-empty lines with their 1-based line numbers; CR stripped.
pub(crate) fn rows<R: BufRead>(input: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let l = l.map(|mut s| {
                if s.ends_with('\r') {
                    s.pop();
                }
                s
            });
            (i + 1, l)
        })
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
}

pub(crate) fn parse_iri(field: &str, row: usize) -> Result<Iri, TsvError> {
    Iri::new(field.trim()).map_err(|e| TsvError::Malformed {
        row,
        reason: e.to_string(),
    })
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escape_round_trip() {
        for s in ["plain", "a\tb", "back\\slash\\t", "line\nbreak\r", ""] {
            assert_eq!(unescape(&escape(s)), s);
        }
    }
}
