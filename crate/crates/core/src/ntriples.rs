//! Line-oriented N-Triples reader and canonical writer.
//!
//! Supports the W3C N-Triples grammar: IRI references, blank node labels and
//! quoted literals with an optional language tag or datatype. Every line is
//! parsed independently, so documents are split at line boundaries and the
//! pieces parsed in parallel.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

/// An absolute IRI, stored without the surrounding angle brackets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, InvalidIri> {
        let value = value.as_ref();
        if value.is_empty() {
            return Err(InvalidIri::Empty);
        }
        if !value.contains(':') {
            return Err(InvalidIri::NoScheme(value.to_owned()));
        }
        if let Some(c) = value
            .chars()
            .find(|c| c.is_whitespace() || matches!(c, '<' | '>' | '"'))
        {
            return Err(InvalidIri::ForbiddenChar(value.to_owned(), c));
        }
        Ok(Iri(Arc::from(value)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Substring after the last `#` or `/`. IRIs with neither (URNs, CURIE-like
    /// identifiers) fall back to the part after the last `:`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) => &s[i + 1..],
            None => s.rfind(':').map_or(s, |i| &s[i + 1..]),
        }
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for Iri {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidIri {
    #[error("empty IRI")]
    Empty,
    #[error("IRI {0:?} has no scheme separator")]
    NoScheme(String),
    #[error("IRI {0:?} contains forbidden character {1:?}")]
    ForbiddenChar(String, char),
}

/// Blank node label, without the `_:` prefix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlankNode(String);

impl BlankNode {
    pub fn new(label: impl Into<String>) -> Option<Self> {
        let label = label.into();
        let mut chars = label.chars();
        let first_ok = chars.next().is_some_and(|c| c.is_ascii_alphanumeric());
        let rest_ok = label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
        (first_ok && rest_ok && !label.ends_with('.')).then_some(BlankNode(label))
    }

    pub fn label(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LiteralAnnotation {
    None,
    /// Lowercased language tag.
    Lang(String),
    Datatype(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub lexical: String,
    pub annotation: LiteralAnnotation,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            annotation: LiteralAnnotation::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&BlankNode> {
        match self {
            Term::Blank(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }
}

/// One statement. The subject is never a literal; the parser and
/// [`Triple::new`] both enforce this.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Option<Self> {
        if matches!(subject, Term::Literal(_)) {
            return None;
        }
        Some(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// Convenience constructor for an all-IRI triple.
    pub fn iris(s: &Iri, p: &Iri, o: &Iri) -> Self {
        Triple {
            subject: Term::Iri(s.clone()),
            predicate: p.clone(),
            object: Term::Iri(o.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("input is not valid UTF-8 (byte offset {0})")]
    InvalidUtf8(usize),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Skip malformed lines instead of failing on the first one.
    pub lenient: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedDocument {
    pub triples: Vec<Triple>,
    /// `(line number, reason)` for lines dropped in lenient mode.
    pub skipped: Vec<(usize, String)>,
}

pub fn parse_bytes(bytes: &[u8], opts: ParseOptions) -> Result<ParsedDocument, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::InvalidUtf8(e.valid_up_to()))?;
    parse_document(text, opts)
}

pub fn parse_document(text: &str, opts: ParseOptions) -> Result<ParsedDocument, ParseError> {
    let lines: Vec<&str> = text.split('\n').collect();
    let parsed: Vec<Result<Option<Triple>, String>> = lines
        .par_iter()
        .map(|line| parse_line(line.strip_suffix('\r').unwrap_or(line)))
        .collect();

    let mut doc = ParsedDocument::default();
    for (i, result) in parsed.into_iter().enumerate() {
        match result {
            Ok(Some(t)) => doc.triples.push(t),
            Ok(None) => {}
            Err(reason) if opts.lenient => doc.skipped.push((i + 1, reason)),
            Err(reason) => return Err(ParseError::MalformedLine { line: i + 1, reason }),
        }
    }
    Ok(doc)
}

/// Parses one line. `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut cur = Cursor::new(line);
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => Term::Blank(cur.blank()?),
        _ => return Err("subject must be an IRI or blank node".into()),
    };
    cur.skip_ws();
    let predicate = match cur.peek() {
        Some('<') => cur.iri()?,
        _ => return Err("predicate must be an IRI".into()),
    };
    cur.skip_ws();
    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => Term::Blank(cur.blank()?),
        Some('"') => Term::Literal(cur.literal()?),
        _ => return Err("object must be an IRI, blank node or literal".into()),
    };
    cur.skip_ws();
    match cur.next() {
        Some('.') => {}
        None => return Err("missing terminator".into()),
        Some(c) => return Err(format!("unexpected {c:?} before terminator")),
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err("trailing content after terminator".into());
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

struct Cursor<'a> {
    rest: std::str::Chars<'a>,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { rest: s.chars() }
    }

    fn peek(&self) -> Option<char> {
        self.rest.clone().next()
    }

    fn next(&mut self) -> Option<char> {
        self.rest.next()
    }

    fn at_end(&self) -> bool {
        self.rest.as_str().is_empty()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.rest.next();
        }
    }

    fn expect(&mut self, want: char) -> Result<(), String> {
        match self.next() {
            Some(c) if c == want => Ok(()),
            Some(c) => Err(format!("expected {want:?}, found {c:?}")),
            None => Err(format!("expected {want:?}, found end of line")),
        }
    }

    fn iri(&mut self) -> Result<Iri, String> {
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.next() {
                None => return Err("unterminated IRI".into()),
                Some('>') => break,
                Some('\\') => match self.next() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return Err("invalid escape in IRI".into()),
                },
                Some(c) if is_iri_forbidden(c) => return Err(format!("character {c:?} not allowed in IRI")),
                Some(c) => out.push(c),
            }
        }
        Iri::new(&out).map_err(|e| e.to_string())
    }

    fn blank(&mut self) -> Result<BlankNode, String> {
        self.expect('_')?;
        self.expect(':')?;
        let s = self.rest.as_str();
        let len = s
            .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-')))
            .unwrap_or(s.len());
        // a trailing '.' belongs to the statement terminator
        let label = s[..len].trim_end_matches('.');
        let node = BlankNode::new(label).ok_or_else(|| format!("invalid blank node label {label:?}"))?;
        self.rest = s[label.len()..].chars();
        Ok(node)
    }

    fn literal(&mut self) -> Result<Literal, String> {
        self.expect('"')?;
        let mut lexical = String::new();
        loop {
            match self.next() {
                None => return Err("unterminated literal".into()),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.next() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err("invalid escape in literal".into()),
                    };
                    lexical.push(c);
                }
                Some('\n' | '\r') => return Err("raw line break in literal".into()),
                Some(c) => lexical.push(c),
            }
        }
        let annotation = match self.peek() {
            Some('@') => {
                self.next();
                let s = self.rest.as_str();
                let len = s
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                    .unwrap_or(s.len());
                let tag = &s[..len];
                let valid = !tag.is_empty()
                    && tag
                        .split('-')
                        .enumerate()
                        .all(|(i, part)| !part.is_empty() && (i > 0 || part.chars().all(|c| c.is_ascii_alphabetic())));
                if !valid {
                    return Err(format!("invalid language tag {tag:?}"));
                }
                self.rest = s[len..].chars();
                LiteralAnnotation::Lang(tag.to_ascii_lowercase())
            }
            Some('^') => {
                self.next();
                self.expect('^')?;
                LiteralAnnotation::Datatype(self.iri()?)
            }
            _ => LiteralAnnotation::None,
        };
        Ok(Literal { lexical, annotation })
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, String> {
        let mut code = 0u32;
        for _ in 0..digits {
            let d = self
                .next()
                .and_then(|c| c.to_digit(16))
                .ok_or("invalid hex digit in escape")?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| format!("escape U+{code:X} is not a scalar value"))
    }
}

fn is_iri_forbidden(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}

/// Writes one triple as a canonical N-Triples line (no trailing newline).
pub fn to_ntriples_line(t: &Triple) -> String {
    let mut out = String::new();
    write_term(&mut out, &t.subject);
    out.push(' ');
    write_iri(&mut out, &t.predicate);
    out.push(' ');
    write_term(&mut out, &t.object);
    out.push_str(" .");
    out
}

pub fn to_ntriples(triples: &[Triple]) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&to_ntriples_line(t));
        out.push('\n');
    }
    out
}

fn write_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(iri) => write_iri(out, iri),
        Term::Blank(b) => {
            out.push_str("_:");
            out.push_str(b.label());
        }
        Term::Literal(lit) => {
            out.push('"');
            for c in lit.lexical.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    '\u{8}' => out.push_str("\\b"),
                    '\u{c}' => out.push_str("\\f"),
                    c if c < ' ' || c == '\u{7f}' => out.push_str(&format!("\\u{:04X}", c as u32)),
                    c => out.push(c),
                }
            }
            out.push('"');
            match &lit.annotation {
                LiteralAnnotation::None => {}
                LiteralAnnotation::Lang(tag) => {
                    out.push('@');
                    out.push_str(tag);
                }
                LiteralAnnotation::Datatype(dt) => {
                    out.push_str("^^");
                    write_iri(out, dt);
                }
            }
        }
    }
}

fn write_iri(out: &mut String, iri: &Iri) {
    out.push('<');
    for c in iri.as_str().chars() {
        if is_iri_forbidden(c) {
            out.push_str(&format!("\\u{:04X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out.push('>');
}
