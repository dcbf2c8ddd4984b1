//! Skip-gram with negative sampling.
//!
//! For a center token `c`, a context token `o` and negatives `n_1..n_k` the
//! loss is
//!
//! ```text
//! L = -ln σ(u_o · v_c) - Σ_k ln σ(-u_{n_k} · v_c)
//! ```
//!
//! where `v` are input vectors (the published embeddings) and `u` output
//! vectors. One SGD step subtracts `lr` times the exact gradient of `L`
//! evaluated at the current parameters.
//!
//! Training runs in one of two modes. With one worker it is strictly
//! sequential and bit-reproducible for a fixed seed. With several workers
//! the corpus is sharded by sentence and all workers update the shared
//! matrices without locking; lost updates are tolerated and results vary
//! from run to run.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::Float;
use rand::Rng;
use thiserror::Error;

use crate::corpus::Sentence;
use crate::rng;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no token reaches min_count; the corpus is empty")]
    EmptyCorpus,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("embedding file line {line}: {reason}")]
    MalformedEmbeddings { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tokens ordered by descending count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn build_vocab<'a, I>(corpus: I, min_count: u64) -> Result<Vocabulary, TrainError>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for sentence in corpus {
        for t in sentence {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let tokens: Vec<String> = kept.iter().map(|(t, _)| t.to_string()).collect();
    let counts = kept.iter().map(|&(_, c)| c).collect();
    let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary { tokens, counts, index })
}

/// Draws token `i` with probability `count(i)^power / Σ_j count(j)^power`
/// by inverse-CDF lookup.
#[derive(Debug, Clone)]
pub struct UnigramSampler {
    cumulative: Vec<f64>,
}

impl UnigramSampler {
    pub fn new(counts: &[u64], power: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(power);
                acc
            })
            .collect();
        UnigramSampler { cumulative }
    }

    pub fn for_vocab(vocab: &Vocabulary, power: f64) -> Self {
        Self::new(&vocab.counts, power)
    }

    pub fn probability(&self, i: usize) -> f64 {
        let total = *self.cumulative.last().expect("non-empty");
        let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - lo) / total
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let x = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= x)
            .min(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub epochs: usize,
    pub window: usize,
    pub negatives: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub min_count: u64,
    pub unigram_power: f64,
    /// Frequent-token subsampling threshold; `None` keeps every token.
    pub subsample: Option<f64>,
    pub rng_seed: u64,
    /// 1 for deterministic training; more for lock-free parallel updates.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            epochs: 70,
            window: 5,
            negatives: 5,
            initial_lr: 0.025,
            final_lr: 1e-4,
            min_count: 1,
            unigram_power: 0.75,
            subsample: None,
            rng_seed: 42,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::InvalidConfig(msg.to_owned()));
        if self.dim < 1 {
            return bad("dim must be >= 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be >= 1");
        }
        if self.window < 1 {
            return bad("window must be >= 1");
        }
        if !(self.final_lr > 0.0 && self.final_lr <= self.initial_lr) {
            return bad("learning rates must satisfy 0 < final_lr <= initial_lr");
        }
        if !self.unigram_power.is_finite() {
            return bad("unigram_power must be finite");
        }
        if self.subsample.is_some_and(|t| t.is_nan() || t <= 0.0) {
            return bad("subsample threshold must be positive");
        }
        if self.workers < 1 {
            return bad("workers must be >= 1");
        }
        Ok(())
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    dim: usize,
    data: Vec<F>,
}

impl<F: Float> Matrix<F> {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Matrix {
            rows,
            dim,
            data: vec![F::zero(); rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * dim);
        Matrix { rows, dim, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }
}

/// Row access used by the update step, so the same step serves both the
/// sequential matrices and the shared lock-free ones.
pub trait ParamRows<F> {
    fn load(&self, row: usize, out: &mut [F]);
    /// `row += alpha * x`
    fn add_scaled(&mut self, row: usize, alpha: F, x: &[F]);
}

impl<F: Float> ParamRows<F> for Matrix<F> {
    fn load(&self, row: usize, out: &mut [F]) {
        out.copy_from_slice(self.row(row));
    }

    fn add_scaled(&mut self, row: usize, alpha: F, x: &[F]) {
        for (p, &d) in self.row_mut(row).iter_mut().zip(x) {
            *p = *p + alpha * d;
        }
    }
}

/// f32 matrix shared between training threads. Loads and stores are
/// relaxed atomics, so concurrent read-modify-write sequences may lose
/// updates but never tear a value.
struct SharedMatrix {
    dim: usize,
    data: Vec<AtomicU32>,
}

impl SharedMatrix {
    fn from_matrix(m: &Matrix<f32>) -> Self {
        SharedMatrix {
            dim: m.dim,
            data: m.data.iter().map(|x| AtomicU32::new(x.to_bits())).collect(),
        }
    }

    fn into_matrix(self, rows: usize) -> Matrix<f32> {
        let dim = self.dim;
        Matrix::from_vec(
            rows,
            dim,
            self.data.into_iter().map(|a| f32::from_bits(a.into_inner())).collect(),
        )
    }
}

struct SharedRows<'a>(&'a SharedMatrix);

impl ParamRows<f32> for SharedRows<'_> {
    fn load(&self, row: usize, out: &mut [f32]) {
        let cells = &self.0.data[row * self.0.dim..(row + 1) * self.0.dim];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f32::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_scaled(&mut self, row: usize, alpha: f32, x: &[f32]) {
        let cells = &self.0.data[row * self.0.dim..(row + 1) * self.0.dim];
        for (c, &d) in cells.iter().zip(x) {
            let v = f32::from_bits(c.load(Ordering::Relaxed)) + alpha * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }
}

fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// `-ln σ(x)` without overflow.
fn neg_log_sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Eight running sums so the loop vectorizes.
fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [F::zero(); 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .fold(F::zero(), |s, (&x, &y)| s + x * y);
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] = acc[i] + x[i] * y[i];
        }
    }
    acc.iter().fold(tail, |s, &v| s + v)
}

/// Loss and gradients of one (center, context, negatives) example.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients<F> {
    pub loss: F,
    /// dL/dv_c
    pub center: Vec<F>,
    /// dL/du for the context followed by each negative, in order.
    pub outputs: Vec<Vec<F>>,
}

/// Loss of one example; fills `coeffs[k] = dL/d(u_k . v_c)` and adds
/// `sum_k coeffs[k] * u_k` (that is, dL/dv_c) into `grad_center`.
fn accumulate<'a, F: Float + 'a>(
    center: &[F],
    outputs: impl Iterator<Item = &'a [F]>,
    grad_center: &mut [F],
    coeffs: &mut Vec<F>,
) -> F {
    coeffs.clear();
    let mut loss = F::zero();
    for (k, u) in outputs.enumerate() {
        let score = dot(u, center);
        // label 1 for the context, 0 for negatives
        let (g, l) = if k == 0 {
            (sigmoid(score) - F::one(), neg_log_sigmoid(score))
        } else {
            (sigmoid(score), neg_log_sigmoid(-score))
        };
        loss = loss + l;
        for (gc, &ui) in grad_center.iter_mut().zip(u) {
            *gc = *gc + g * ui;
        }
        coeffs.push(g);
    }
    loss
}

/// Evaluates the loss and its analytic gradient. `outputs[0]` is the
/// positive context vector, the rest are negatives.
pub fn sgns_gradients<F: Float>(center: &[F], outputs: &[&[F]]) -> SgnsGradients<F> {
    let mut grad_center = vec![F::zero(); center.len()];
    let mut coeffs = Vec::with_capacity(outputs.len());
    let loss = accumulate(center, outputs.iter().copied(), &mut grad_center, &mut coeffs);
    SgnsGradients {
        loss,
        center: grad_center,
        outputs: coeffs
            .iter()
            .map(|&g| center.iter().map(|&vi| g * vi).collect())
            .collect(),
    }
}

/// Reusable buffers for [`sgns_step`].
#[derive(Debug, Clone, Default)]
pub struct StepScratch<F> {
    center: Vec<F>,
    grad_center: Vec<F>,
    /// Context then negative output rows, back to back.
    outputs: Vec<F>,
    coeffs: Vec<F>,
}

/// One SGD step on the example `(center, context, negatives)`. All
/// gradients are taken at the parameters as they were before the step, so
/// repeated negatives accumulate. Returns the example's loss.
#[allow(clippy::too_many_arguments)]
pub fn sgns_step<F: Float, I: ParamRows<F> + ?Sized, O: ParamRows<F> + ?Sized>(
    input: &mut I,
    output: &mut O,
    dim: usize,
    center: usize,
    context: usize,
    negatives: &[usize],
    lr: F,
    scratch: &mut StepScratch<F>,
) -> F {
    let n = 1 + negatives.len();
    let rows = || std::iter::once(context).chain(negatives.iter().copied());
    scratch.center.resize(dim, F::zero());
    input.load(center, &mut scratch.center);
    scratch.outputs.resize(n * dim, F::zero());
    for (buf, r) in scratch.outputs.chunks_exact_mut(dim).zip(rows()) {
        output.load(r, buf);
    }
    scratch.grad_center.clear();
    scratch.grad_center.resize(dim, F::zero());
    let loss = accumulate(
        &scratch.center,
        scratch.outputs.chunks_exact(dim),
        &mut scratch.grad_center,
        &mut scratch.coeffs,
    );
    for (r, &g) in rows().zip(&scratch.coeffs) {
        output.add_scaled(r, -lr * g, &scratch.center);
    }
    input.add_scaled(center, -lr, &scratch.grad_center);
    loss
}

/// Trained model: the vocabulary with input and output vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub vocab: Vocabulary,
    pub input: Matrix<f32>,
    pub output: Matrix<f32>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.input.dim()
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        self.vocab.index(token).map(|i| self.input.row(i))
    }

    /// The published embeddings (input vectors only).
    pub fn word_vectors(&self) -> WordVectors {
        WordVectors::new(self.vocab.tokens.clone(), self.input.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean loss per (center, context) example for each epoch.
    pub epoch_losses: Vec<f64>,
    pub examples: u64,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub table: EmbeddingTable,
    pub report: TrainReport,
}

const INIT_STREAM: u64 = 0x696e_6974;
const TRAIN_STREAM: u64 = 0x74_7261_696e;

/// Learning rate after `processed` of `total` center tokens.
fn learning_rate(cfg: &TrainConfig, processed: u64, total: u64) -> f64 {
    let frac = if total == 0 {
        0.0
    } else {
        processed as f64 / total as f64
    };
    (cfg.initial_lr - (cfg.initial_lr - cfg.final_lr) * frac).max(cfg.final_lr)
}

struct Trainer<'a> {
    cfg: &'a TrainConfig,
    sampler: UnigramSampler,
    /// Keep probability per vocabulary index when subsampling.
    keep: Option<Vec<f64>>,
    total_tokens: u64,
}

impl Trainer<'_> {
    /// Trains on `sentences` for one epoch; `processed` counts center tokens
    /// across all workers for the learning-rate schedule.
    fn epoch<R: Rng, I: ParamRows<f32>, O: ParamRows<f32>>(
        &self,
        sentences: &[Vec<usize>],
        input: &mut I,
        output: &mut O,
        rng: &mut R,
        processed: &AtomicU64,
    ) -> (f64, u64) {
        let dim = self.cfg.dim;
        let mut scratch = StepScratch::default();
        let mut negs = Vec::with_capacity(self.cfg.negatives);
        let mut kept = Vec::new();
        let mut loss = 0.0;
        let mut examples = 0;
        for sentence in sentences {
            let sentence: &[usize] = match &self.keep {
                None => sentence,
                Some(keep) => {
                    kept.clear();
                    kept.extend(sentence.iter().copied().filter(|&t| rng.gen::<f64>() < keep[t]));
                    &kept
                }
            };
            for (i, &center) in sentence.iter().enumerate() {
                let done = processed.fetch_add(1, Ordering::Relaxed);
                let lr = learning_rate(self.cfg, done, self.total_tokens) as f32;
                let b = rng.gen_range(1..=self.cfg.window);
                let lo = i.saturating_sub(b);
                let hi = (i + b).min(sentence.len() - 1);
                for (j, &context) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negs.clear();
                    for _ in 0..self.cfg.negatives {
                        if let Some(n) = (0..16).map(|_| self.sampler.sample(rng)).find(|&n| n != context) {
                            negs.push(n);
                        }
                    }
                    loss += sgns_step(input, output, dim, center, context, &negs, lr, &mut scratch) as f64;
                    examples += 1;
                }
            }
        }
        (loss, examples)
    }
}

pub fn train(corpus: &[Sentence], cfg: &TrainConfig) -> Result<Trained, TrainError> {
    cfg.validate()?;
    let vocab = build_vocab(corpus, cfg.min_count)?;
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index(t)).collect::<Vec<_>>())
        .filter(|s| s.len() > 1)
        .collect();
    let tokens_per_epoch: u64 = sentences.iter().map(|s| s.len() as u64).sum();

    let keep = cfg.subsample.map(|t| {
        let total = vocab.total_count() as f64;
        vocab
            .counts
            .iter()
            .map(|&c| {
                let f = c as f64 / total;
                ((f / t).sqrt() + 1.0) * t / f
            })
            .collect()
    });
    let trainer = Trainer {
        cfg,
        sampler: UnigramSampler::for_vocab(&vocab, cfg.unigram_power),
        keep,
        total_tokens: tokens_per_epoch * cfg.epochs as u64,
    };

    let mut init_rng = rng::stream(cfg.rng_seed, INIT_STREAM, 0);
    let half = 0.5 / cfg.dim as f32;
    let init: Vec<f32> = (0..vocab.len() * cfg.dim)
        .map(|_| init_rng.gen_range(-half..=half))
        .collect();
    let mut input = Matrix::from_vec(vocab.len(), cfg.dim, init);
    let mut output = Matrix::zeros(vocab.len(), cfg.dim);
    let processed = AtomicU64::new(0);

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut total_examples = 0;
    if cfg.workers == 1 {
        let mut rng = rng::stream(cfg.rng_seed, TRAIN_STREAM, 0);
        for _ in 0..cfg.epochs {
            let (loss, n) = trainer.epoch(&sentences, &mut input, &mut output, &mut rng, &processed);
            epoch_losses.push(if n == 0 { 0.0 } else { loss / n as f64 });
            total_examples += n;
        }
    } else {
        let shared_in = SharedMatrix::from_matrix(&input);
        let shared_out = SharedMatrix::from_matrix(&output);
        let shard_len = sentences.len().div_ceil(cfg.workers).max(1);
        let per_worker: Vec<Vec<(f64, u64)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(shard_len)
                .enumerate()
                .map(|(w, shard)| {
                    let (trainer, shared_in, shared_out, processed) = (&trainer, &shared_in, &shared_out, &processed);
                    scope.spawn(move || {
                        let mut rng = rng::stream(cfg.rng_seed, TRAIN_STREAM, w as u64);
                        let (mut si, mut so) = (SharedRows(shared_in), SharedRows(shared_out));
                        (0..cfg.epochs)
                            .map(|_| trainer.epoch(shard, &mut si, &mut so, &mut rng, processed))
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });
        for e in 0..cfg.epochs {
            let (loss, n) = per_worker.iter().fold((0.0, 0), |(l, c), w| (l + w[e].0, c + w[e].1));
            epoch_losses.push(if n == 0 { 0.0 } else { loss / n as f64 });
            total_examples += n;
        }
        input = shared_in.into_matrix(vocab.len());
        output = shared_out.into_matrix(vocab.len());
    }

    Ok(Trained {
        table: EmbeddingTable { vocab, input, output },
        report: TrainReport {
            epoch_losses,
            examples: total_examples,
        },
    })
}

/// Token vectors as published: word2vec text format on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectors {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Matrix<f32>,
}

impl WordVectors {
    pub fn new(tokens: Vec<String>, vectors: Matrix<f32>) -> Self {
        assert_eq!(tokens.len(), vectors.rows());
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        WordVectors { tokens, index, vectors }
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.vectors.row(i))
    }

    /// Multiplies every vector by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        let data = self.vectors.as_slice().iter().map(|x| x * factor).collect();
        WordVectors::new(self.tokens.clone(), Matrix::from_vec(self.len(), self.dim(), data))
    }

    /// `<vocab_size> <dim>` header, then `<token> <floats...>` per line with
    /// six significant digits (C `%g`).
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim())?;
        let mut line = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            line.clear();
            line.push_str(t);
            for &x in self.vectors.row(i) {
                line.push(' ');
                line.push_str(&format_g6(x as f64));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self, TrainError> {
        let bad = |line: usize, reason: String| TrainError::MalformedEmbeddings { line, reason };
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| bad(1, "missing header".into()))??;
        let mut parts = header.split_whitespace();
        let mut num = |what: &str| -> Result<usize, TrainError> {
            parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(1, format!("bad {what} in header")))
        };
        let (n, dim) = (num("vocabulary size")?, num("dimension")?);
        let mut tokens = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let token = fields.next().unwrap_or_default().to_owned();
            let before = data.len();
            for f in fields {
                data.push(f.parse::<f32>().map_err(|_| bad(i + 2, format!("bad float {f:?}")))?);
            }
            if data.len() - before != dim {
                return Err(bad(
                    i + 2,
                    format!("expected {dim} values, found {}", data.len() - before),
                ));
            }
            tokens.push(token);
        }
        if tokens.len() != n {
            return Err(bad(1, format!("header announces {n} tokens, found {}", tokens.len())));
        }
        Ok(WordVectors::new(tokens, Matrix::from_vec(n, dim, data)))
    }
}

/// C's `%g` with precision 6.
pub fn format_g6(x: f64) -> String {
    const P: i32 = 6;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sentences(text: &str) -> Vec<Sentence> {
        text.lines()
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn vocab_counts_and_order() {
        let c = sentences("a a b");
        let v = build_vocab(&c, 1).unwrap();
        assert_eq!(v.tokens(), ["a", "b"]);
        assert_eq!(v.counts(), [2, 1]);
        let v = build_vocab(&c, 2).unwrap();
        assert_eq!(v.tokens(), ["a"]);
        let v = build_vocab(&sentences("b a b a"), 1).unwrap();
        assert_eq!(v.tokens(), ["a", "b"]);
        assert!(matches!(build_vocab(&c, 3), Err(TrainError::EmptyCorpus)));
        assert!(matches!(build_vocab(&[], 1), Err(TrainError::EmptyCorpus)));
    }

    #[test]
    fn unigram_probabilities() {
        let s = UnigramSampler::new(&[8, 1], 0.75);
        // 8^0.75 = 2^2.25
        let a = 2f64.powf(2.25);
        assert!((s.probability(0) - a / (a + 1.0)).abs() < 1e-15);
        assert!((s.probability(0) - 0.8262).abs() < 1e-4);
        assert!((s.probability(1) - 0.1738).abs() < 1e-4);

        let u = UnigramSampler::new(&[3, 3, 3, 3], 0.75);
        let p0 = UnigramSampler::new(&[100, 1, 7], 0.0);
        for i in 0..3 {
            assert!((u.probability(i) - 0.25).abs() < 1e-15);
            assert!((p0.probability(i) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_vectors_give_ln2_loss() {
        let z = [0.0f64; 4];
        let g = sgns_gradients(&z, &[&z]);
        assert!((g.loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..20).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let mut input = Matrix::from_vec(5, 4, data.clone());
        let mut output = Matrix::from_vec(5, 4, data.iter().rev().copied().collect());
        let (i0, o0) = (input.clone(), output.clone());
        sgns_step(
            &mut input,
            &mut output,
            4,
            0,
            1,
            &[2, 3],
            0.0,
            &mut StepScratch::default(),
        );
        assert_eq!(input, i0);
        assert_eq!(output, o0);
    }

    #[test]
    fn step_applies_negative_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut input = Matrix::from_vec(5, 3, (0..15).map(|_| rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>());
        let mut output = Matrix::from_vec(5, 3, (0..15).map(|_| rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>());
        let (i0, o0) = (input.clone(), output.clone());
        let negs = [2, 4, 2];
        let g = sgns_gradients(input.row(1), &[o0.row(0), o0.row(2), o0.row(4), o0.row(2)]);
        let lr = 0.1;
        sgns_step(&mut input, &mut output, 3, 1, 0, &negs, lr, &mut StepScratch::default());
        for d in 0..3 {
            assert!((input.row(1)[d] - (i0.row(1)[d] - lr * g.center[d])).abs() < 1e-15);
            assert!((output.row(0)[d] - (o0.row(0)[d] - lr * g.outputs[0][d])).abs() < 1e-15);
            // repeated negative accumulates both gradients
            let expect = o0.row(2)[d] - lr * (g.outputs[1][d] + g.outputs[3][d]);
            assert!((output.row(2)[d] - expect).abs() < 1e-15);
        }
        assert_eq!(input.row(0), i0.row(0));
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            TrainConfig {
                epochs: 0,
                ..ok.clone()
            },
            TrainConfig { dim: 0, ..ok.clone() },
            TrainConfig {
                window: 0,
                ..ok.clone()
            },
            TrainConfig {
                final_lr: 0.0,
                ..ok.clone()
            },
            TrainConfig {
                final_lr: 0.5,
                ..ok.clone()
            },
            TrainConfig {
                workers: 0,
                ..ok.clone()
            },
        ] {
            assert!(matches!(bad.validate(), Err(TrainError::InvalidConfig(_))));
        }
        assert!(matches!(
            train(&sentences("a b"), &TrainConfig { epochs: 0, ..ok }),
            Err(TrainError::InvalidConfig(_))
        ));
    }

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            dim: 16,
            epochs: 5,
            rng_seed: 5,
            ..Default::default()
        }
    }

    #[test]
    fn deterministic_single_worker() {
        let c = sentences("a b c d\nb c d e\nc d e a\nx y z\n");
        let a = train(&c, &small_cfg()).unwrap();
        let b = train(&c, &small_cfg()).unwrap();
        let (mut fa, mut fb) = (Vec::new(), Vec::new());
        a.table.word_vectors().write_text(&mut fa).unwrap();
        b.table.word_vectors().write_text(&mut fb).unwrap();
        assert_eq!(fa, fb);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn parallel_mode_produces_finite_vectors() {
        let c: Vec<Sentence> = (0..200)
            .map(|i| (0..8).map(|j| format!("t{}", (i * 3 + j * 5) % 40)).collect())
            .collect();
        let cfg = TrainConfig {
            workers: 4,
            ..small_cfg()
        };
        let t = train(&c, &cfg).unwrap();
        assert!(t.table.input.as_slice().iter().all(|x| x.is_finite()));
        assert_eq!(t.report.epoch_losses.len(), 5);
    }

    #[test]
    fn subsampling_flag_runs() {
        let c = sentences("a a a a a a b\na a a a c a a\n");
        let cfg = TrainConfig {
            subsample: Some(1e-3),
            ..small_cfg()
        };
        let t = train(&c, &cfg).unwrap();
        assert_eq!(t.table.vocab.len(), 3);
    }

    #[test]
    fn input_init_range_and_zero_output() {
        let c = sentences("a b");
        let cfg = TrainConfig {
            epochs: 1,
            initial_lr: 1e-30,
            final_lr: 1e-30,
            ..small_cfg()
        };
        let t = train(&c, &cfg).unwrap();
        let half = 0.5 / 16.0;
        assert!(t.table.input.as_slice().iter().all(|x| x.abs() <= half));
        assert!(t.table.input.as_slice().iter().any(|&x| x != 0.0));
    }

    #[test]
    fn format_g6_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-0.5, "-0.5"),
            (0.1234567, "0.123457"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234567, "1.23457e-05"),
            (-3.0e-7, "-3e-07"),
            (9.9999996, "10"),
            (2.5e100, "2.5e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g6(x), want, "{x}");
        }
    }

    #[test]
    fn word2vec_text_round_trip() {
        let wv = WordVectors::new(
            vec!["http://e/a".into(), "sugar".into()],
            Matrix::from_vec(2, 3, vec![0.5, -0.25, 1e-6, 3.0, 0.0, -1.5]),
        );
        let mut buf = Vec::new();
        wv.write_text(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "2 3\nhttp://e/a 0.5 -0.25 1e-06\nsugar 3 0 -1.5\n"
        );
        assert_eq!(WordVectors::read_text(&buf[..]).unwrap(), wv);
        assert!(WordVectors::read_text("2 3\na 1 2 3\n".as_bytes()).is_err());
        assert!(WordVectors::read_text("1 3\na 1 2\n".as_bytes()).is_err());
    }
}
