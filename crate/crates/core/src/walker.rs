//! Biased random walks from seed entities.
//!
//! For each iteration and each seed present in the graph one walk is
//! produced: start at the seed, repeatedly draw an outgoing edge with
//! probability proportional to its weight, append the edge label and the
//! target vertex, and stop once the walk holds `walk_depth` vertices or the
//! current vertex has no outgoing edges. There is no visited set; vertices
//! may repeat.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::ntriples::Iri;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    /// Maximum number of vertices per walk.
    pub walk_depth: usize,
    pub iterations: usize,
    pub rng_seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walk_depth: 3,
            iterations: 1,
            rng_seed: 42,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), WalkError> {
        if self.walk_depth < 1 {
            return Err(WalkError::InvalidConfig("walk_depth must be >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(WalkError::InvalidConfig("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("invalid walk configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {reason}")]
    MalformedWalk { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Alternating vertex / edge-label IRIs, starting and ending with a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub tokens: Vec<Iri>,
}

impl Walk {
    pub fn vertex_count(&self) -> usize {
        self.tokens.len().div_ceil(2)
    }

    pub fn seed(&self) -> &Iri {
        &self.tokens[0]
    }

    /// `(vertex, label, vertex)` steps.
    pub fn steps(&self) -> impl Iterator<Item = (&Iri, &Iri, &Iri)> {
        self.tokens.windows(3).step_by(2).map(|w| (&w[0], &w[1], &w[2]))
    }
}

#[derive(Debug, Clone, Default)]
pub struct WalkOutput {
    /// Iteration-major, then seed order.
    pub walks: Vec<Walk>,
    /// Seeds that are not vertices of the graph.
    pub missing_seeds: Vec<Iri>,
}

/// Runs the walks on the current rayon pool. The result does not depend on
/// the number of threads.
pub fn generate_walks(g: &WeightedGraph, seeds: &[Iri], cfg: &WalkConfig) -> Result<WalkOutput, WalkError> {
    cfg.validate()?;
    let mut present = Vec::with_capacity(seeds.len());
    let mut missing_seeds = Vec::new();
    for (idx, s) in seeds.iter().enumerate() {
        match g.vertex(s.as_str()) {
            Some(v) => present.push((idx as u64, v)),
            None => missing_seeds.push(s.clone()),
        }
    }
    if !missing_seeds.is_empty() {
        log::warn!("{} seed entities are not in the graph", missing_seeds.len());
    }

    let units: Vec<(u64, u64, usize)> = (0..cfg.iterations as u64)
        .flat_map(|k| present.iter().map(move |&(s, v)| (k, s, v)))
        .collect();
    let walks = units
        .par_iter()
        .map(|&(k, s, v)| walk_from(g, v, cfg.walk_depth, &mut rng::stream(cfg.rng_seed, k, s)))
        .collect();
    Ok(WalkOutput { walks, missing_seeds })
}

/// One walk from vertex `start`, drawing one uniform variate per step.
pub fn walk_from<R: Rng>(g: &WeightedGraph, start: usize, walk_depth: usize, rng: &mut R) -> Walk {
    let mut tokens = Vec::with_capacity(2 * walk_depth - 1);
    tokens.push(g.vertex_iri(start).clone());
    let mut focus = start;
    let mut size = 1;
    while size < walk_depth {
        let Some(edge) = g.sample_edge(focus, rng.gen::<f64>()) else {
            break;
        };
        tokens.push(g.label_iri(edge.label).clone());
        tokens.push(g.vertex_iri(edge.target).clone());
        focus = edge.target;
        size += 1;
    }
    Walk { tokens }
}

/// One walk per line, IRIs separated by single spaces.
pub fn write_walks<W: Write>(walks: &[Walk], mut out: W) -> std::io::Result<()> {
    for w in walks {
        let mut first = true;
        for t in &w.tokens {
            if !first {
                out.write_all(b" ")?;
            }
            out.write_all(t.as_str().as_bytes())?;
            first = false;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_walks<R: BufRead>(input: R) -> Result<Vec<Walk>, WalkError> {
    let mut walks = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let tokens = line
            .split(' ')
            .map(Iri::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| WalkError::MalformedWalk {
                line: i + 1,
                reason: e.to_string(),
            })?;
        if tokens.len() % 2 == 0 {
            return Err(WalkError::MalformedWalk {
                line: i + 1,
                reason: "walk must have an odd number of tokens".into(),
            });
        }
        walks.push(Walk { tokens });
    }
    Ok(walks)
}
