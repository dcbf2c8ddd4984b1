//! Local-ranking evaluation: score each candidate target by cosine
//! similarity to the source entity and report MRR and Hits@K.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{tokenize_label, TokenizerConfig};
use crate::ntriples::Iri;
use crate::projection::LexicalTable;
use crate::sgns::WordVectors;
use crate::tsv;

/// Cut-offs reported for Hits@K.
pub const HITS_AT: [usize; 5] = [1, 5, 10, 20, 30];

/// Score given to pairs where either side has no usable vector; below every
/// cosine value.
pub const ABSENT_SCORE: f64 = -2.0;

#[derive(Debug, Error)]
pub enum RankingError {
    #[error("pool {0}: no candidates")]
    EmptyPool(usize),
    #[error("pool {0}: true target is not among the candidates")]
    TargetNotInCandidates(usize),
    #[error(transparent)]
    Tsv(#[from] tsv::TsvError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    pub source: Iri,
    pub true_target: Iri,
    /// Deduplicated, containing `true_target`.
    pub candidates: Vec<Iri>,
}

impl CandidatePool {
    /// Deduplicates `candidates` (first occurrence wins) and checks that the
    /// true target is present.
    pub fn new(source: Iri, true_target: Iri, candidates: Vec<Iri>) -> Result<Self, RankingError> {
        let mut seen = HashSet::new();
        let candidates: Vec<Iri> = candidates.into_iter().filter(|c| seen.insert(c.clone())).collect();
        if candidates.is_empty() {
            return Err(RankingError::EmptyPool(0));
        }
        if !candidates.contains(&true_target) {
            return Err(RankingError::TargetNotInCandidates(0));
        }
        Ok(CandidatePool {
            source,
            true_target,
            candidates,
        })
    }
}

/// `SrcEntity \t TgtEntity \t TgtCandidates` with a comma-separated
/// candidate list. A leading `SrcEntity` header row is skipped.
pub fn read_pools<R: BufRead>(input: R) -> Result<Vec<CandidatePool>, RankingError> {
    let mut pools = Vec::new();
    for (row, line) in tsv::rows(input) {
        let line = line.map_err(tsv::TsvError::from)?;
        let fields: Vec<&str> = line.split('\t').collect();
        if row == 1 && fields[0].trim() == "SrcEntity" {
            continue;
        }
        if fields.len() != 3 {
            return Err(tsv::TsvError::Malformed {
                row,
                reason: format!("expected 3 columns, found {}", fields.len()),
            }
            .into());
        }
        let candidates = fields[2]
            .split(',')
            .filter(|c| !c.trim().is_empty())
            .map(|c| tsv::parse_iri(c, row))
            .collect::<Result<Vec<_>, _>>()?;
        let pool = CandidatePool::new(
            tsv::parse_iri(fields[0], row)?,
            tsv::parse_iri(fields[1], row)?,
            candidates,
        )
        .map_err(|e| match e {
            RankingError::EmptyPool(_) => RankingError::EmptyPool(row),
            RankingError::TargetNotInCandidates(_) => RankingError::TargetNotInCandidates(row),
            other => other,
        })?;
        pools.push(pool);
    }
    Ok(pools)
}

pub fn write_pools<W: Write>(pools: &[CandidatePool], mut out: W) -> std::io::Result<()> {
    writeln!(out, "SrcEntity\tTgtEntity\tTgtCandidates")?;
    for p in pools {
        let cands: Vec<&str> = p.candidates.iter().map(Iri::as_str).collect();
        writeln!(out, "{}\t{}\t{}", p.source, p.true_target, cands.join(","))?;
    }
    Ok(())
}

/// Vector lookup with a lexical fallback.
pub struct EntityScorer<'a> {
    vectors: &'a WordVectors,
    lexical: &'a LexicalTable,
    tokenizer: TokenizerConfig,
}

impl<'a> EntityScorer<'a> {
    pub fn new(vectors: &'a WordVectors, lexical: &'a LexicalTable) -> Self {
        EntityScorer {
            vectors,
            lexical,
            tokenizer: TokenizerConfig::default(),
        }
    }

    /// The IRI's own vector; failing that, the mean of the in-vocabulary
    /// word vectors of its primary label; failing that, `None`.
    pub fn entity_vector(&self, iri: &str) -> Option<Vec<f64>> {
        if let Some(v) = self.vectors.get(iri) {
            return Some(v.iter().map(|&x| x as f64).collect());
        }
        let label = self.lexical.primary_label(iri)?;
        let mut sum = vec![0.0; self.vectors.dim()];
        let mut n = 0;
        for word in tokenize_label(label, &self.tokenizer) {
            if let Some(v) = self.vectors.get(&word) {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += x as f64;
                }
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }

    /// Cosine similarity in [-1, 1], or [`ABSENT_SCORE`].
    pub fn score(&self, source: &str, target: &str) -> f64 {
        match (self.entity_vector(source), self.entity_vector(target)) {
            (Some(a), Some(b)) => cosine(&a, &b).unwrap_or(ABSENT_SCORE),
            _ => ABSENT_SCORE,
        }
    }

    /// Candidates with scores, best first; ties go to the smaller IRI.
    pub fn rank_pool(&self, pool: &CandidatePool) -> Vec<(Iri, f64)> {
        let src = self.entity_vector(pool.source.as_str());
        let mut scored: Vec<(Iri, f64)> = pool
            .candidates
            .iter()
            .map(|c| {
                let s = match (&src, self.entity_vector(c.as_str())) {
                    (Some(a), Some(b)) => cosine(a, &b).unwrap_or(ABSENT_SCORE),
                    _ => ABSENT_SCORE,
                };
                (c.clone(), s)
            })
            .collect();
        scored.sort_by(compare_ranked);
        scored
    }
}

/// `None` when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

fn compare_ranked(a: &(Iri, f64), b: &(Iri, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// 1-based rank of `target` among `(candidate, score)` pairs under the
/// descending-score, ascending-IRI order.
pub fn rank_of(scores: &[(Iri, f64)], target: &Iri) -> Option<usize> {
    let t = scores.iter().find(|(c, _)| c == target)?;
    Some(1 + scores.iter().filter(|c| compare_ranked(c, t) == Ordering::Less).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub mrr: f64,
    pub hits: BTreeMap<usize, f64>,
    /// Rank of the true target, per pool.
    pub ranks: Vec<usize>,
}

impl RankingReport {
    pub fn from_ranks(ranks: Vec<usize>) -> Self {
        let n = ranks.len() as f64;
        let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n;
        let hits = HITS_AT
            .iter()
            .map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / n))
            .collect();
        RankingReport { mrr, hits, ranks }
    }

    pub fn hits_at(&self, k: usize) -> f64 {
        self.hits[&k]
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "MRR")?;
        for k in self.hits.keys() {
            write!(out, "\tHits@{k}")?;
        }
        writeln!(out)?;
        write!(out, "{:?}", self.mrr)?;
        for v in self.hits.values() {
            write!(out, "\t{v:?}")?;
        }
        writeln!(out)
    }
}

impl fmt::Display for RankingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|   MRR |")?;
        for k in self.hits.keys() {
            write!(f, " {:>7} |", format!("Hits@{k}"))?;
        }
        writeln!(f)?;
        write!(f, "| {:.3} |", self.mrr)?;
        for v in self.hits.values() {
            write!(f, " {v:>7.3} |")?;
        }
        writeln!(f)?;
        write!(f, "({} pools)", self.ranks.len())
    }
}

/// Ranks every pool and aggregates MRR and Hits@K.
pub fn evaluate(
    pools: &[CandidatePool],
    vectors: &WordVectors,
    lexical: &LexicalTable,
) -> Result<RankingReport, RankingError> {
    let scorer = EntityScorer::new(vectors, lexical);
    let ranks = pools
        .par_iter()
        .enumerate()
        .map(|(i, pool)| {
            if pool.candidates.is_empty() {
                return Err(RankingError::EmptyPool(i));
            }
            let ranked = scorer.rank_pool(pool);
            rank_of(&ranked, &pool.true_target).ok_or(RankingError::TargetNotInCandidates(i))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ranks.is_empty() {
        return Err(RankingError::EmptyPool(0));
    }
    Ok(RankingReport::from_ranks(ranks))
}

/// Per-candidate rows: `SrcEntity \t Candidate \t Score \t Rank \t IsTarget`.
pub fn write_rankings<W: Write>(
    pools: &[CandidatePool],
    vectors: &WordVectors,
    lexical: &LexicalTable,
    mut out: W,
) -> std::io::Result<()> {
    let scorer = EntityScorer::new(vectors, lexical);
    writeln!(out, "SrcEntity\tCandidate\tScore\tRank\tIsTarget")?;
    for pool in pools {
        for (i, (c, s)) in scorer.rank_pool(pool).iter().enumerate() {
            writeln!(
                out,
                "{}\t{}\t{:?}\t{}\t{}",
                pool.source,
                c,
                s,
                i + 1,
                *c == pool.true_target
            )?;
        }
    }
    Ok(())
}
