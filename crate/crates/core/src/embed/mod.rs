//! Skip-gram with negative sampling over the walk corpus.
//!
//! Conventions: shrinking context window (per-position radius uniform in
//! `[1, window]`), `negatives` noise words per (center, context) pair drawn
//! from corpus counts raised to `noise_exponent`, learning rate decaying
//! linearly from `initial_lr` to `min_lr` over all epochs. Noise words equal
//! to the observed context are skipped.

mod io;
mod sgns;

pub use io::{load_embeddings, read_embeddings, save_embeddings, write_embeddings};
pub use sgns::{sgns_pair_loss, sigmoid, PairGradients, SIGMOID_EPS};

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::walk::{AliasTable, WalkCorpus};

use sgns::{sgns_step, DenseRows, Rows, SharedRows};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dimension: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub min_lr: f64,
    pub noise_exponent: f64,
    /// Frequent-word subsampling threshold (word2vec `sample`); off when unset.
    pub subsample: Option<f64>,
    pub seed: u64,
    /// Single worker, canonical order, bit-reproducible output. When false,
    /// `threads` workers update shared tables without locks.
    pub deterministic: bool,
    /// Worker count for parallel mode; 0 means the rayon default.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dimension: 100,
            window: 10,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            min_lr: 1e-4,
            noise_exponent: 0.75,
            subsample: None,
            seed: 1,
            deterministic: true,
            threads: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 1 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if self.window < 1 {
            return Err(Error::config("window must be at least 1"));
        }
        if self.negatives < 1 {
            return Err(Error::config("negatives must be at least 1"));
        }
        if !(self.min_lr > 0.0 && self.initial_lr > self.min_lr && self.initial_lr.is_finite()) {
            return Err(Error::config(format!(
                "need initial_lr > min_lr > 0, got {} and {}",
                self.initial_lr, self.min_lr
            )));
        }
        if !self.noise_exponent.is_finite() {
            return Err(Error::config("noise_exponent must be finite"));
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::config("subsample threshold must be positive"));
            }
        }
        Ok(())
    }
}

/// Word vectors: the input table is the learned representation; the output
/// (context) table is only populated while training.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    words: Vec<String>,
    index: FxHashMap<String, u32>,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
}

impl EmbeddingMatrix {
    /// Build from words and a row-major `words.len() x dim` input table.
    pub fn from_parts(words: Vec<String>, dim: usize, input: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("embedding dimension must be at least 1"));
        }
        if input.len() != words.len() * dim {
            return Err(Error::config(format!(
                "{} values for {} words of dimension {dim}",
                input.len(),
                words.len()
            )));
        }
        let mut index = FxHashMap::default();
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::config(format!("duplicate word `{w}`")));
            }
        }
        Ok(EmbeddingMatrix {
            words,
            index,
            dim,
            input,
            output: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: u32) -> &str {
        &self.words[i as usize]
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, i: u32) -> &[f32] {
        let s = i as usize * self.dim;
        &self.input[s..s + self.dim]
    }

    pub fn vector_of(&self, word: &str) -> Option<&[f32]> {
        self.id(word).map(|i| self.vector(i))
    }

    pub fn input_vectors(&self) -> &[f32] {
        &self.input
    }

    /// Context table; empty for loaded embeddings.
    pub fn output_vectors(&self) -> &[f32] {
        &self.output
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }
}

/// Input rows uniform in `(-0.5/d, 0.5/d)`, output rows zero.
pub fn init_embeddings(words: Vec<String>, dim: usize, seed: u64) -> Result<EmbeddingMatrix> {
    if words.is_empty() {
        return Err(Error::config("cannot initialize embeddings for an empty vocabulary"));
    }
    let n = words.len();
    let half = 0.5 / dim.max(1) as f32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input: Vec<f32> = (0..n * dim)
        .map(|_| loop {
            let x = (rng.random::<f32>() - 0.5) / dim as f32;
            if x > -half {
                break x;
            }
        })
        .collect();
    let mut m = EmbeddingMatrix::from_parts(words, dim, input)?;
    m.output = vec![0.0; n * dim];
    Ok(m)
}

/// Sampler with `P(v) ∝ counts[v]^exponent`.
pub fn noise_distribution(counts: &[u64], exponent: f64) -> Result<AliasTable> {
    let w: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(exponent)).collect();
    AliasTable::new(&w)
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean loss per (center, context) example, one entry per epoch.
    pub epoch_losses: Vec<f64>,
    pub examples: u64,
    pub tokens: u64,
}

struct Shared<'a> {
    config: &'a TrainConfig,
    noise: AliasTable,
    keep_prob: Option<Vec<f32>>,
    total_work: f64,
}

impl Shared<'_> {
    #[inline]
    fn lr(&self, done: u64) -> f32 {
        let c = self.config;
        let progress = (done as f64 / self.total_work).min(1.0);
        (c.initial_lr - (c.initial_lr - c.min_lr) * progress) as f32
    }
}

struct Scratch {
    center: Vec<f32>,
    grad: Vec<f32>,
    negatives: Vec<u32>,
    kept: Vec<u32>,
}

impl Scratch {
    fn new(dim: usize, negatives: usize) -> Self {
        Scratch {
            center: vec![0.0; dim],
            grad: vec![0.0; dim],
            negatives: Vec::with_capacity(negatives),
            kept: Vec::new(),
        }
    }
}

/// Train on one sequence; returns (summed loss, example count).
fn train_sequence<I: Rows, O: Rows>(
    seq: &[u32],
    input: &mut I,
    output: &mut O,
    shared: &Shared<'_>,
    done_before: u64,
    scratch: &mut Scratch,
    rng: &mut ChaCha8Rng,
) -> (f64, u64) {
    let cfg = shared.config;
    let mut kept = std::mem::take(&mut scratch.kept);
    let seq: &[u32] = match &shared.keep_prob {
        Some(keep) => {
            kept.clear();
            kept.extend(seq.iter().copied().filter(|&w| rng.random::<f32>() < keep[w as usize]));
            &kept
        }
        None => seq,
    };
    let mut loss = 0.0;
    let mut examples = 0;
    for (i, &center) in seq.iter().enumerate() {
        let lr = shared.lr(done_before + i as u64);
        let radius = rng.random_range(1..=cfg.window);
        let lo = i.saturating_sub(radius);
        let hi = (i + radius).min(seq.len() - 1);
        for (j, &context) in seq.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            scratch.negatives.clear();
            for _ in 0..cfg.negatives {
                let n = shared.noise.sample(rng);
                if n != context {
                    scratch.negatives.push(n);
                }
            }
            input.read(center, &mut scratch.center);
            loss += sgns_step(
                &scratch.center,
                &mut scratch.grad,
                output,
                context,
                &scratch.negatives,
                lr,
            );
            input.add_scaled(center, 1.0, &scratch.grad);
            examples += 1;
        }
    }
    scratch.kept = kept;
    (loss, examples)
}

/// Train and return the embedding (input vectors).
pub fn train(corpus: &WalkCorpus, vocab: &Vocabulary, config: &TrainConfig) -> Result<EmbeddingMatrix> {
    train_with_report(corpus, vocab, config).map(|(m, _)| m)
}

pub fn train_with_report(
    corpus: &WalkCorpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Result<(EmbeddingMatrix, TrainReport)> {
    config.validate()?;
    if corpus.token_count() == 0 {
        return Err(Error::config("walk corpus is empty"));
    }
    let v = vocab.len();
    if let Some(m) = corpus.max_id() {
        if m as usize >= v {
            return Err(Error::config(format!("corpus id {m} outside vocabulary of {v}")));
        }
    }
    let dim = config.dimension;
    let mut emb = init_embeddings(vocab.words().to_vec(), dim, config.seed)?;
    let counts = corpus.token_counts(v);
    let total_tokens = corpus.token_count() as u64;
    let keep_prob = config.subsample.map(|t| {
        counts
            .iter()
            .map(|&c| {
                let f = c as f64 / total_tokens as f64;
                if f == 0.0 {
                    1.0
                } else {
                    (((f / t).sqrt() + 1.0) * t / f).min(1.0) as f32
                }
            })
            .collect()
    });
    let shared = Shared {
        config,
        noise: noise_distribution(&counts, config.noise_exponent)?,
        keep_prob,
        total_work: (total_tokens * config.epochs as u64).max(1) as f64,
    };
    let mut report = TrainReport {
        tokens: total_tokens,
        ..Default::default()
    };

    let EmbeddingMatrix { input, output, .. } = &mut emb;
    if config.deterministic {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        let mut input = DenseRows { data: input, dim };
        let mut output = DenseRows { data: output, dim };
        let mut scratch = Scratch::new(dim, config.negatives);
        let mut done = 0u64;
        for _ in 0..config.epochs {
            let (mut loss, mut examples) = (0.0, 0u64);
            for seq in corpus.iter() {
                let (l, e) = train_sequence(seq, &mut input, &mut output, &shared, done, &mut scratch, &mut rng);
                loss += l;
                examples += e;
                done += seq.len() as u64;
            }
            report.examples += examples;
            report.epoch_losses.push(loss / examples.max(1) as f64);
        }
    } else {
        let threads = if config.threads == 0 {
            rayon::current_num_threads()
        } else {
            config.threads
        }
        .max(1);
        let input = SharedRows::new(input, dim);
        let output = SharedRows::new(output, dim);
        let seqs: Vec<&[u32]> = corpus.iter().collect();
        let shard = seqs.len().div_ceil(threads).max(1);
        let done = AtomicU64::new(0);
        for epoch in 0..config.epochs {
            let results: Vec<(f64, u64)> = std::thread::scope(|s| {
                let handles: Vec<_> = seqs
                    .chunks(shard)
                    .enumerate()
                    .map(|(k, chunk)| {
                        let (shared, done) = (&shared, &done);
                        let (mut input, mut output) = (input, output);
                        s.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                            rng.set_stream((epoch as u64) << 32 | (k as u64 + 2));
                            let mut scratch = Scratch::new(dim, config.negatives);
                            let (mut loss, mut examples) = (0.0, 0u64);
                            for seq in chunk {
                                let before = done.fetch_add(seq.len() as u64, Ordering::Relaxed);
                                let (l, e) = train_sequence(
                                    seq,
                                    &mut input,
                                    &mut output,
                                    shared,
                                    before,
                                    &mut scratch,
                                    &mut rng,
                                );
                                loss += l;
                                examples += e;
                            }
                            (loss, examples)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            let loss: f64 = results.iter().map(|r| r.0).sum();
            let examples: u64 = results.iter().map(|r| r.1).sum();
            report.examples += examples;
            report.epoch_losses.push(loss / examples.max(1) as f64);
        }
    }
    Ok((emb, report))
}
