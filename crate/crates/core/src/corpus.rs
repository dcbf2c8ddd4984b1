//! Structure, lexical and combined documents built from walks.
//!
//! * structure: each walk verbatim (IRI tokens);
//! * lexical: every IRI replaced by the word tokens of its label;
//! * combined: each IRI occurrence replaced by its label words with
//!   probability `replace_prob`, otherwise kept.
//!
//! The training corpus is the three documents concatenated in that order.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::ntriples::Iri;
use crate::projection::LexicalTable;
use crate::rng;
use crate::walker::Walk;

pub type Sentence = Vec<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { lowercase: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Lower,
    Upper,
    Digit,
    /// Alphabetic without case (CJK and friends).
    Other,
}

fn class_of(c: char) -> Option<CharClass> {
    if c.is_lowercase() {
        Some(CharClass::Lower)
    } else if c.is_uppercase() {
        Some(CharClass::Upper)
    } else if c.is_numeric() {
        Some(CharClass::Digit)
    } else if c.is_alphanumeric() {
        Some(CharClass::Other)
    } else {
        None
    }
}

/// Splits a label into word tokens at non-alphanumeric characters,
/// lower-to-upper case changes and letter/digit boundaries.
pub fn tokenize_label(label: &str, cfg: &TokenizerConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev: Option<CharClass> = None;
    for c in label.chars() {
        let Some(class) = class_of(c) else {
            flush(&mut tokens, &mut current, cfg);
            prev = None;
            continue;
        };
        let boundary = match (prev, class) {
            (Some(CharClass::Lower), CharClass::Upper) => true,
            (Some(CharClass::Digit), CharClass::Digit) => false,
            (Some(CharClass::Digit), _) | (Some(_), CharClass::Digit) => true,
            _ => false,
        };
        if boundary {
            flush(&mut tokens, &mut current, cfg);
        }
        current.push(c);
        prev = Some(class);
    }
    flush(&mut tokens, &mut current, cfg);
    tokens
}

fn flush(tokens: &mut Vec<String>, current: &mut String, cfg: &TokenizerConfig) {
    if current.is_empty() {
        return;
    }
    let word = std::mem::take(current);
    tokens.push(if cfg.lowercase { word.to_lowercase() } else { word });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexicalSource {
    Label,
    LocalName,
    /// Neither a usable label nor a local name; the whole IRI is the token.
    FullIri,
}

/// Which label stands in for an entity in sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum LabelChoice {
    #[default]
    Primary,
    /// Uniform draw among all labels, per occurrence.
    Uniform,
}

/// Word tokens for an IRI: its primary label, else its local name, else the
/// IRI itself as a single token.
pub fn lexicalize(iri: &Iri, lex: &LexicalTable, cfg: &TokenizerConfig) -> Vec<String> {
    lexicalize_label(iri, lex.primary_label(iri.as_str()), cfg).0
}

fn lexicalize_label(iri: &Iri, label: Option<&str>, cfg: &TokenizerConfig) -> (Vec<String>, LexicalSource) {
    if let Some(label) = label {
        let words = tokenize_label(label, cfg);
        if !words.is_empty() {
            return (words, LexicalSource::Label);
        }
    }
    let words = tokenize_label(iri.local_name(), cfg);
    if !words.is_empty() {
        return (words, LexicalSource::LocalName);
    }
    (vec![iri.as_str().to_owned()], LexicalSource::FullIri)
}

#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub replace_prob: f64,
    pub label_choice: LabelChoice,
    pub tokenizer: TokenizerConfig,
    pub rng_seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            replace_prob: 0.5,
            label_choice: LabelChoice::Primary,
            tokenizer: TokenizerConfig::default(),
            rng_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Documents {
    pub structure: Vec<Sentence>,
    pub lexical: Vec<Sentence>,
    pub combined: Vec<Sentence>,
    /// Lexical-document occurrences that fell back to the full IRI.
    pub iri_fallbacks: usize,
}

impl Documents {
    /// structure, then lexical, then combined.
    pub fn merged(&self) -> impl Iterator<Item = &Sentence> {
        self.structure.iter().chain(&self.lexical).chain(&self.combined)
    }
}

// stream tags
const LEXICAL_STREAM: u64 = 0x6c65_7869_6361_6c00;
const COMBINED_STREAM: u64 = 0x636f_6d62_696e_6564;

struct Lexicalizer<'a> {
    lex: &'a LexicalTable,
    cfg: &'a CorpusConfig,
}

impl Lexicalizer<'_> {
    fn words<R: Rng>(&self, iri: &Iri, rng: &mut R) -> (Vec<String>, LexicalSource) {
        let labels = self.lex.labels(iri.as_str()).unwrap_or(&[]);
        let label = match self.cfg.label_choice {
            LabelChoice::Primary => labels.first(),
            LabelChoice::Uniform if labels.is_empty() => None,
            LabelChoice::Uniform => Some(&labels[rng.gen_range(0..labels.len())]),
        };
        lexicalize_label(iri, label.map(String::as_str), &self.cfg.tokenizer)
    }
}

pub fn build_documents(walks: &[Walk], lex: &LexicalTable, cfg: &CorpusConfig) -> Documents {
    let lz = Lexicalizer { lex, cfg };
    let per_walk: Vec<(Sentence, Sentence, Sentence, usize)> = walks
        .par_iter()
        .enumerate()
        .map(|(i, walk)| {
            let structure: Sentence = walk.tokens.iter().map(|t| t.as_str().to_owned()).collect();

            let mut rng = rng::stream(cfg.rng_seed, LEXICAL_STREAM, i as u64);
            let mut lexical = Vec::new();
            let mut fallbacks = 0;
            for t in &walk.tokens {
                let (words, source) = lz.words(t, &mut rng);
                if source == LexicalSource::FullIri {
                    fallbacks += 1;
                }
                lexical.extend(words);
            }

            let mut rng = rng::stream(cfg.rng_seed, COMBINED_STREAM, i as u64);
            let mut combined = Vec::new();
            for t in &walk.tokens {
                // one draw per occurrence whatever the outcome
                if rng.gen::<f64>() < cfg.replace_prob {
                    combined.extend(lz.words(t, &mut rng).0);
                } else {
                    combined.push(t.as_str().to_owned());
                }
            }
            (structure, lexical, combined, fallbacks)
        })
        .collect();

    let mut docs = Documents::default();
    for (s, l, c, f) in per_walk {
        docs.structure.push(s);
        docs.lexical.push(l);
        docs.combined.push(c);
        docs.iri_fallbacks += f;
    }
    docs
}

/// One sentence per line, tokens separated by single spaces.
pub fn write_sentences<'a, W: Write, I: IntoIterator<Item = &'a Sentence>>(
    sentences: I,
    mut out: W,
) -> std::io::Result<()> {
    for s in sentences {
        writeln!(out, "{}", s.join(" "))?;
    }
    Ok(())
}

pub fn read_sentences<R: BufRead>(input: R) -> std::io::Result<Vec<Sentence>> {
    input
        .lines()
        .map(|l| l.map(|l| l.split_whitespace().map(str::to_owned).collect()))
        .collect()
}
