//! Seeded generator for a pair of isomorphic taxonomies with perturbed
//! labels, a partial seed alignment and local-ranking pools for the rest.
//!
//! Source class `i` maps to target class `perm[i]`; the target tree is the
//! source tree relabelled through `perm`. Labels are two pseudo-words. On
//! the target side each word is swapped for a fixed synonym with probability
//! `relabel_prob` and the word order is reversed with probability 1/2, so
//! surface overlap alone does not identify the match.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::alignment::{Mapping, MappingSet, Relation};
use crate::ntriples::{to_ntriples, Iri, Literal, Term, Triple};
use crate::ranking::{write_pools, CandidatePool};
use crate::rng;
use crate::vocab;

pub const SOURCE_NS: &str = "http://example.org/source#";
pub const TARGET_NS: &str = "http://example.org/target#";

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub classes: usize,
    /// Share of class pairs given as seed mappings.
    pub seed_fraction: f64,
    pub confidence: f64,
    /// Candidates per pool, true target included.
    pub pool_size: usize,
    pub relabel_prob: f64,
    /// Distinct label words per side.
    pub words: usize,
    pub rng_seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            classes: 200,
            seed_fraction: 0.5,
            confidence: 0.9,
            pool_size: 50,
            relabel_prob: 0.5,
            words: 120,
            rng_seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTask {
    pub source: Vec<Triple>,
    pub target: Vec<Triple>,
    pub seeds: MappingSet,
    /// Every true pair, seeded or held out.
    pub reference: Vec<Mapping>,
    /// One pool per held-out pair.
    pub pools: Vec<CandidatePool>,
}

#[derive(Debug, Clone)]
pub struct SyntheticFiles {
    pub source: PathBuf,
    pub target: PathBuf,
    pub seeds: PathBuf,
    pub pools: PathBuf,
}

impl SyntheticTask {
    /// Writes `source.nt`, `target.nt`, `seeds.tsv` and `pools.tsv`.
    pub fn write(&self, dir: &Path) -> io::Result<SyntheticFiles> {
        fs::create_dir_all(dir)?;
        let files = SyntheticFiles {
            source: dir.join("source.nt"),
            target: dir.join("target.nt"),
            seeds: dir.join("seeds.tsv"),
            pools: dir.join("pools.tsv"),
        };
        fs::write(&files.source, to_ntriples(&self.source))?;
        fs::write(&files.target, to_ntriples(&self.target))?;
        self.seeds.write_tsv(fs::File::create(&files.seeds)?)?;
        write_pools(&self.pools, fs::File::create(&files.pools)?)?;
        Ok(files)
    }
}

const SYLLABLES: [&str; 20] = [
    "ba", "ko", "ri", "mu", "te", "sa", "lo", "ne", "pi", "du", "ga", "ve", "zo", "fi", "ha", "ju", "qe", "wy", "xo",
    "ca",
];

/// `n` distinct lowercase pseudo-words of two or three syllables.
fn pseudo_words<R: Rng>(n: usize, rng: &mut R) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.gen_range(2..=3);
        let w: String = (0..len).map(|_| *SYLLABLES.choose(rng).expect("non-empty")).collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn class_iri(ns: &str, prefix: char, i: usize) -> Iri {
    Iri::new(format!("{ns}{prefix}{i:04}")).expect("generated IRI")
}

fn taxonomy(classes: &[Iri], parent: &[Option<usize>], labels: &[String]) -> Vec<Triple> {
    let iri = |s: &str| Iri::new(s).expect("static IRI");
    let (rdf_type, owl_class, label, sub) = (
        iri(vocab::RDF_TYPE),
        iri(vocab::OWL_CLASS),
        iri(vocab::RDFS_LABEL),
        iri(vocab::RDFS_SUBCLASS_OF),
    );
    let mut triples = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        triples.push(Triple::iris(c, &rdf_type, &owl_class));
        triples.push(
            Triple::new(
                Term::Iri(c.clone()),
                label.clone(),
                Term::Literal(Literal::plain(&labels[i])),
            )
            .expect("IRI subject"),
        );
        if let Some(p) = parent[i] {
            triples.push(Triple::iris(c, &sub, &classes[p]));
        }
    }
    triples
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticTask {
    let n = cfg.classes;
    let mut rng = rng::stream(cfg.rng_seed, 0x7379_6e74, 0);

    // random recursive tree rooted at 0
    let parent: Vec<Option<usize>> = (0..n).map(|i| (i > 0).then(|| rng.gen_range(0..i))).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);

    let words = pseudo_words(2 * cfg.words, &mut rng);
    let (own, synonyms) = words.split_at(cfg.words);
    let mut src_labels = Vec::with_capacity(n);
    let mut tgt_labels = vec![String::new(); n];
    for i in 0..n {
        let a = rng.gen_range(0..cfg.words);
        let b = (a + rng.gen_range(1..cfg.words)) % cfg.words;
        src_labels.push(format!("{} {}", own[a], own[b]));
        let mut t: Vec<&str> = [a, b]
            .iter()
            .map(|&w| {
                if rng.gen::<f64>() < cfg.relabel_prob {
                    synonyms[w].as_str()
                } else {
                    own[w].as_str()
                }
            })
            .collect();
        if rng.gen::<bool>() {
            t.reverse();
        }
        tgt_labels[perm[i]] = t.join(" ");
    }

    let src: Vec<Iri> = (0..n).map(|i| class_iri(SOURCE_NS, 'S', i)).collect();
    let tgt: Vec<Iri> = (0..n).map(|i| class_iri(TARGET_NS, 'T', i)).collect();
    let mut tgt_parent = vec![None; n];
    for i in 0..n {
        tgt_parent[perm[i]] = parent[i].map(|p| perm[p]);
    }

    let reference: Vec<Mapping> = (0..n)
        .map(|i| {
            Mapping::new(
                src[i].clone(),
                tgt[perm[i]].clone(),
                Relation::Equivalence,
                cfg.confidence,
            )
            .expect("valid mapping")
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_seeds = (cfg.seed_fraction * n as f64).round() as usize;
    let (seeded, held_out) = order.split_at(n_seeds);
    let mut seeded = seeded.to_vec();
    seeded.sort_unstable();
    let mut held_out = held_out.to_vec();
    held_out.sort_unstable();
    let seeds: MappingSet = seeded.iter().map(|&i| reference[i].clone()).collect();

    let pool_size = cfg.pool_size.min(n);
    let pools = held_out
        .iter()
        .map(|&i| {
            let truth = perm[i];
            let mut others: Vec<usize> = (0..n).filter(|&j| j != truth).collect();
            others.shuffle(&mut rng);
            let mut cands: Vec<Iri> = others[..pool_size - 1].iter().map(|&j| tgt[j].clone()).collect();
            cands.insert(rng.gen_range(0..pool_size), tgt[truth].clone());
            CandidatePool::new(src[i].clone(), tgt[truth].clone(), cands).expect("valid pool")
        })
        .collect();

    SyntheticTask {
        source: taxonomy(&src, &parent, &src_labels),
        target: taxonomy(&tgt, &tgt_parent, &tgt_labels),
        seeds,
        reference,
        pools,
    }
}
