//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code under test except to build inputs.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet};

use alignwalk::ntriples::Iri;
use alignwalk::projection::ProjectedEdge;
use alignwalk::ranking::CandidatePool;
use alignwalk::sgns::{sgns_gradients, sgns_step, Matrix, StepScratch, WordVectors};
use alignwalk::walker::Walk;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn edge(s: &str, l: &str, t: &str, w: f64) -> ProjectedEdge {
    ProjectedEdge {
        source: iri(s),
        label: iri(l),
        target: iri(t),
        weight: w,
    }
}

/// A random labelled multigraph (self-loops and duplicates included) with a
/// seed list that mixes vertices, isolated names and repeats.
pub struct RandomInstance {
    pub edges: Vec<ProjectedEdge>,
    pub seeds: Vec<Iri>,
}

pub fn random_instance<R: Rng>(rng: &mut R) -> RandomInstance {
    let n = rng.gen_range(1..=12);
    let m = rng.gen_range(0..=30);
    let labels = ["e:p", "e:q", "e:r"];
    let edges = (0..m)
        .map(|_| {
            edge(
                &format!("e:v{}", rng.gen_range(0..n)),
                labels[rng.gen_range(0..labels.len())],
                &format!("e:v{}", rng.gen_range(0..n)),
                rng.gen_range(0.01..=1.0),
            )
        })
        .collect();
    let seeds = (0..rng.gen_range(0..=8))
        .map(|_| iri(&format!("e:v{}", rng.gen_range(0..n + 2))))
        .collect();
    RandomInstance { edges, seeds }
}

/// (label, target) of one walk step.
pub type Step = (String, String);

/// Vertices and edge triples as the graph should see them: self-loops gone.
pub struct EdgeOracle {
    pub vertices: HashSet<String>,
    pub edges: HashSet<(String, String, String)>,
    /// Summed weight per (source, label, target) after keeping the max of
    /// duplicates, grouped by source.
    pub out: HashMap<String, Vec<(Step, f64)>>,
}

impl EdgeOracle {
    pub fn new(edges: &[ProjectedEdge]) -> Self {
        let mut best: HashMap<(String, String, String), f64> = HashMap::new();
        for e in edges {
            if e.source == e.target {
                continue;
            }
            let k = (e.source.to_string(), e.label.to_string(), e.target.to_string());
            let w = best.entry(k).or_insert(0.0);
            *w = w.max(e.weight);
        }
        let mut vertices = HashSet::new();
        let mut out: HashMap<String, Vec<(Step, f64)>> = HashMap::new();
        for ((s, l, t), w) in &best {
            vertices.insert(s.clone());
            vertices.insert(t.clone());
            out.entry(s.clone()).or_default().push(((l.clone(), t.clone()), *w));
        }
        EdgeOracle {
            vertices,
            edges: best.into_keys().collect(),
            out,
        }
    }

    /// P(first step = (label, target)) by direct normalisation.
    pub fn step_probabilities(&self, source: &str) -> HashMap<(String, String), f64> {
        let list = self.out.get(source).cloned().unwrap_or_default();
        let total: f64 = list.iter().map(|(_, w)| w).sum();
        list.into_iter().map(|(k, w)| (k, w / total)).collect()
    }
}

/// Every structural property a walk must have. `Err` names the first one
/// violated.
pub fn check_walk(w: &Walk, seed: &Iri, walk_depth: usize, oracle: &EdgeOracle) -> Result<(), String> {
    let t = &w.tokens;
    if t.is_empty() || t.len().is_multiple_of(2) {
        return Err(format!("token count {} is not odd", t.len()));
    }
    let v = t.len().div_ceil(2);
    if v > walk_depth {
        return Err(format!("{v} vertices exceed depth {walk_depth}"));
    }
    if &t[0] != seed {
        return Err(format!("starts at {} not {seed}", t[0]));
    }
    for i in (0..t.len()).step_by(2) {
        if !oracle.vertices.contains(t[i].as_str()) {
            return Err(format!("position {i} is not a vertex"));
        }
    }
    for i in (0..t.len() - 1).step_by(2) {
        let key = (t[i].to_string(), t[i + 1].to_string(), t[i + 2].to_string());
        if !oracle.edges.contains(&key) {
            return Err(format!("step {key:?} is not an edge"));
        }
    }
    // early stop only at a dead end
    let last = t[t.len() - 1].as_str();
    if v < walk_depth && oracle.out.contains_key(last) {
        return Err(format!(
            "stopped at {last} with {v} < {walk_depth} vertices and outgoing edges"
        ));
    }
    Ok(())
}

pub fn cosine_f32(a: &[f32], b: &[f32]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some((dot / (na * nb)).clamp(-1.0, 1.0))
    }
}

/// Rank of the true target by insertion-sorting candidates under
/// (score descending, IRI ascending). Absent or zero vectors score -2.
pub fn brute_force_rank(pool: &CandidatePool, vectors: &WordVectors) -> usize {
    let score = |c: &Iri| match (vectors.get(pool.source.as_str()), vectors.get(c.as_str())) {
        (Some(a), Some(b)) => cosine_f32(a, b).unwrap_or(-2.0),
        _ => -2.0,
    };
    let before = |a: &(f64, &Iri), b: &(f64, &Iri)| a.0 > b.0 || (a.0 == b.0 && a.1.as_str() < b.1.as_str());
    let mut sorted: Vec<(f64, &Iri)> = Vec::new();
    for c in &pool.candidates {
        let item = (score(c), c);
        let pos = sorted.iter().position(|x| before(&item, x)).unwrap_or(sorted.len());
        sorted.insert(pos, item);
    }
    1 + sorted.iter().position(|(_, c)| *c == &pool.true_target).unwrap()
}

/// MRR and Hits@K straight from their definitions.
pub fn metrics(ranks: &[usize], ks: &[usize]) -> (f64, Vec<f64>) {
    let n = ranks.len() as f64;
    let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n;
    let hits = ks
        .iter()
        .map(|&k| ranks.iter().filter(|&&r| r <= k).count() as f64 / n)
        .collect();
    (mrr, hits)
}

/// Random vectors and pools; about a third of the candidates share a
/// vector with another one, forcing score ties, and some have no vector.
pub fn random_ranking_case<R: Rng>(rng: &mut R, pools: usize) -> (WordVectors, Vec<CandidatePool>) {
    let dim = rng.gen_range(1..=6);
    let entities: Vec<String> = (0..20).map(|i| format!("e:x{i:02}")).collect();
    let mut base: Vec<Vec<f32>> = Vec::new();
    let mut tokens = Vec::new();
    let mut data = Vec::new();
    for e in &entities {
        if rng.gen_bool(0.1) {
            continue;
        }
        let v: Vec<f32> = if !base.is_empty() && rng.gen_bool(0.35) {
            let mut v = base.choose(rng).unwrap().clone();
            // a positive multiple keeps the cosine identical
            if rng.gen_bool(0.5) {
                v.iter_mut().for_each(|x| *x *= 2.0);
            }
            v
        } else if rng.gen_bool(0.05) {
            vec![0.0; dim]
        } else {
            (0..dim)
                .map(|_| rng.gen_range(-1i32..=1) as f32 * rng.gen_range(1..=3) as f32)
                .collect()
        };
        base.push(v.clone());
        tokens.push(e.clone());
        data.extend(v);
    }
    let vectors = WordVectors::new(tokens.clone(), Matrix::from_vec(tokens.len(), dim, data));
    let pools = (0..pools)
        .map(|_| {
            let source = iri(entities.choose(rng).unwrap());
            let k = rng.gen_range(1..=10);
            let cands: BTreeSet<&String> = entities.choose_multiple(rng, k).collect();
            let mut cands: Vec<Iri> = cands.into_iter().map(|s| iri(s)).collect();
            cands.shuffle(rng);
            let target = cands.choose(rng).unwrap().clone();
            CandidatePool::new(source, target, cands).unwrap()
        })
        .collect();
    (vectors, pools)
}

/// The loss written out directly, in f64.
fn loss_oracle(input: &[f64], output: &[f64], dim: usize, c: usize, o: usize, negs: &[usize]) -> f64 {
    let row = |m: &[f64], i: usize| m[i * dim..(i + 1) * dim].to_vec();
    let v = row(input, c);
    let dot = |u: &[f64]| u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    let log_sigmoid = |x: f64| -(1.0 + (-x).exp()).ln();
    -log_sigmoid(dot(&row(output, o))) - negs.iter().map(|&n| log_sigmoid(-dot(&row(output, n)))).sum::<f64>()
}

/// Max relative error between the analytic gradient and central finite
/// differences over every parameter the example touches.
pub fn gradient_check<R: Rng>(rng: &mut R) -> f64 {
    let vocab = rng.gen_range(2..=10);
    let dim = rng.gen_range(1..=8);
    let input: Vec<f64> = (0..vocab * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let output: Vec<f64> = (0..vocab * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c = rng.gen_range(0..vocab);
    let o = rng.gen_range(0..vocab);
    // repeats allowed: the gradient of a repeated row accumulates
    let negs: Vec<usize> = (0..rng.gen_range(0..=5)).map(|_| rng.gen_range(0..vocab)).collect();

    let row = |m: &[f64], i: usize| m[i * dim..(i + 1) * dim].to_vec();
    let outs: Vec<Vec<f64>> = std::iter::once(o)
        .chain(negs.iter().copied())
        .map(|r| row(&output, r))
        .collect();
    let refs: Vec<&[f64]> = outs.iter().map(Vec::as_slice).collect();
    let g = sgns_gradients(&row(&input, c), &refs);
    assert!((g.loss - loss_oracle(&input, &output, dim, c, o, &negs)).abs() < 1e-12);

    let mut analytic_out = vec![0.0; vocab * dim];
    for (r, go) in std::iter::once(o).chain(negs.iter().copied()).zip(&g.outputs) {
        for d in 0..dim {
            analytic_out[r * dim + d] += go[d];
        }
    }

    let h = 1e-4;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-4);
    let mut worst: f64 = 0.0;
    for d in 0..dim {
        let (mut p, mut m) = (input.clone(), input.clone());
        p[c * dim + d] += h;
        m[c * dim + d] -= h;
        let n = (loss_oracle(&p, &output, dim, c, o, &negs) - loss_oracle(&m, &output, dim, c, o, &negs)) / (2.0 * h);
        worst = worst.max(rel(g.center[d], n));
    }
    for i in 0..vocab * dim {
        let (mut p, mut m) = (output.clone(), output.clone());
        p[i] += h;
        m[i] -= h;
        let n = (loss_oracle(&input, &p, dim, c, o, &negs) - loss_oracle(&input, &m, dim, c, o, &negs)) / (2.0 * h);
        worst = worst.max(rel(analytic_out[i], n));
    }

    // the step moves every touched parameter by -lr times its gradient
    let lr = 0.125;
    let (mut mi, mut mo) = (
        Matrix::from_vec(vocab, dim, input.clone()),
        Matrix::from_vec(vocab, dim, output.clone()),
    );
    sgns_step(&mut mi, &mut mo, dim, c, o, &negs, lr, &mut StepScratch::default());
    for d in 0..dim {
        assert!((mi.row(c)[d] - (input[c * dim + d] - lr * g.center[d])).abs() < 1e-12);
    }
    for i in 0..vocab * dim {
        assert!((mo.as_slice()[i] - (output[i] - lr * analytic_out[i])).abs() < 1e-12);
    }
    worst
}
