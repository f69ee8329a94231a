//! Directed weighted word co-occurrence graph.
//!
//! An edge `u -> x` counts how often `x` immediately follows `u` in the
//! retained token stream. Edges are kept in compressed sparse row form with
//! each node's targets sorted ascending, plus a hash set of `(u, x)` keys for
//! expected O(1) edge membership, which the second-order walk needs on every
//! step.

mod io;
mod weights;

pub use io::{load_graph, read_graph, save_graph, write_edge_list, write_graph};
pub use weights::{compute_tf_node_weights, compute_tfidf_node_weights, tfidf_scores, WeightMode, DEFAULT_IDF_WINDOW};

use std::fmt;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::corpus::{Token, Vocabulary};
use crate::error::{Error, Result};

#[inline]
fn edge_key(u: u32, x: u32) -> u64 {
    (u as u64) << 32 | x as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceGraph {
    vocab: Vocabulary,
    offsets: Vec<u64>,
    targets: Vec<u32>,
    weights: Vec<u64>,
    node_weights: Option<Vec<f64>>,
    edge_set: FxHashSet<u64>,
}

impl CooccurrenceGraph {
    /// Assemble from CSR arrays, checking every structural invariant.
    pub fn from_csr(vocab: Vocabulary, offsets: Vec<u64>, targets: Vec<u32>, weights: Vec<u64>) -> Result<Self> {
        let n = vocab.len();
        let bad = |m: String| Error::Malformed {
            section: "csr",
            message: m,
        };
        if offsets.len() != n + 1 {
            return Err(bad(format!("{} offsets for {n} nodes", offsets.len())));
        }
        if offsets[0] != 0 || offsets[n] as usize != targets.len() {
            return Err(bad("offsets do not span the edge arrays".into()));
        }
        if targets.len() != weights.len() {
            return Err(bad("target/weight length mismatch".into()));
        }
        let mut edge_set = FxHashSet::default();
        edge_set.reserve(targets.len());
        for u in 0..n {
            let (lo, hi) = (offsets[u], offsets[u + 1]);
            if lo > hi {
                return Err(bad(format!("offsets decrease at node {u}")));
            }
            let row = &targets[lo as usize..hi as usize];
            for (i, &x) in row.iter().enumerate() {
                if x as usize >= n {
                    return Err(bad(format!("edge {u}->{x} targets a missing node")));
                }
                if i > 0 && row[i - 1] >= x {
                    return Err(bad(format!("targets of node {u} not strictly ascending")));
                }
                edge_set.insert(edge_key(u as u32, x));
            }
        }
        if weights.contains(&0) {
            return Err(bad("zero-weight edge stored".into()));
        }
        Ok(CooccurrenceGraph {
            vocab,
            offsets,
            targets,
            weights,
            node_weights: None,
            edge_set,
        })
    }

    /// Build from `(source, target, weight)` triples. Repeated pairs are
    /// summed and zero weights are dropped.
    pub fn from_edges<I>(vocab: Vocabulary, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, u64)>,
    {
        let mut pairs: FxHashMap<u64, u64> = FxHashMap::default();
        for (u, x, w) in edges {
            if w > 0 {
                *pairs.entry(edge_key(u, x)).or_insert(0) += w;
            }
        }
        Self::from_pair_counts(vocab, pairs)
    }

    fn from_pair_counts(vocab: Vocabulary, pairs: FxHashMap<u64, u64>) -> Result<Self> {
        let n = vocab.len();
        let mut entries: Vec<(u64, u64)> = pairs.into_iter().collect();
        entries.par_sort_unstable_by_key(|&(k, _)| k);
        let mut offsets = vec![0u64; n + 1];
        let mut targets = Vec::with_capacity(entries.len());
        let mut weights = Vec::with_capacity(entries.len());
        for (key, w) in entries {
            let u = (key >> 32) as usize;
            if u >= n {
                return Err(Error::Internal(format!("edge source {u} outside vocabulary")));
            }
            offsets[u + 1] += 1;
            targets.push(key as u32);
            weights.push(w);
        }
        for u in 0..n {
            offsets[u + 1] += offsets[u];
        }
        Self::from_csr(vocab, offsets, targets, weights)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn node_count(&self) -> usize {
        self.vocab.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    #[inline]
    pub fn out_range(&self, u: u32) -> std::ops::Range<usize> {
        self.offsets[u as usize] as usize..self.offsets[u as usize + 1] as usize
    }

    /// Out-neighbors of `u` and the matching edge weights.
    #[inline]
    pub fn neighbors(&self, u: u32) -> (&[u32], &[u64]) {
        let r = self.out_range(u);
        (&self.targets[r.clone()], &self.weights[r])
    }

    #[inline]
    pub fn out_degree(&self, u: u32) -> usize {
        let r = self.out_range(u);
        r.end - r.start
    }

    #[inline]
    pub fn has_edge(&self, u: u32, x: u32) -> bool {
        self.edge_set.contains(&edge_key(u, x))
    }

    /// Weight of `u -> x`, zero when absent.
    pub fn weight(&self, u: u32, x: u32) -> u64 {
        let (t, w) = self.neighbors(u);
        t.binary_search(&x).map_or(0, |i| w[i])
    }

    /// Look up an edge weight by surface words.
    pub fn weight_by_word(&self, u: &str, x: &str) -> u64 {
        match (self.vocab.id(u), self.vocab.id(x)) {
            (Some(u), Some(x)) => self.weight(u, x),
            _ => 0,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        (0..self.node_count() as u32).flat_map(move |u| {
            let (t, w) = self.neighbors(u);
            t.iter().zip(w).map(move |(&x, &w)| (u, x, w))
        })
    }

    pub fn total_edge_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// Normalized start weights, if set.
    pub fn node_weights(&self) -> Option<&[f64]> {
        self.node_weights.as_deref()
    }

    /// Install start weights. They must be finite, non-negative and not all
    /// zero; they are renormalized to sum to one unless already within 1e-12.
    pub fn set_node_weights(&mut self, mut pw: Vec<f64>) -> Result<()> {
        if pw.len() != self.node_count() {
            return Err(Error::config(format!(
                "{} node weights for {} nodes",
                pw.len(),
                self.node_count()
            )));
        }
        if let Some(i) = pw.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::config(format!("invalid node weight {} at node {i}", pw[i])));
        }
        let sum: f64 = pw.iter().sum();
        if sum <= 0.0 {
            return Err(Error::config("node weights sum to zero"));
        }
        if (sum - 1.0).abs() > 1e-12 {
            pw.iter_mut().for_each(|w| *w /= sum);
        }
        self.node_weights = Some(pw);
        Ok(())
    }

    pub fn clear_node_weights(&mut self) {
        self.node_weights = None;
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }
}

/// Count ordered adjacent pairs of an id stream.
///
/// Shards are counted in parallel on the current rayon pool, each shard
/// also counting the pair that straddles its right boundary, then merged by
/// summation. The result does not depend on the number of threads.
pub fn count_adjacent_pairs(ids: &[u32]) -> FxHashMap<u64, u64> {
    const SHARD: usize = 1 << 20;
    if ids.len() < 2 {
        return FxHashMap::default();
    }
    let pair_count = ids.len() - 1;
    let shards = pair_count.div_ceil(SHARD);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let lo = s * SHARD;
            let hi = ((s + 1) * SHARD).min(pair_count);
            let mut m: FxHashMap<u64, u64> = FxHashMap::default();
            for w in ids[lo..=hi].windows(2) {
                *m.entry(edge_key(w[0], w[1])).or_insert(0) += 1;
            }
            m
        })
        .reduce(FxHashMap::default, |mut a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            for (k, v) in small {
                *big.entry(k).or_insert(0) += v;
            }
            a = big;
            a
        })
}

/// Build the graph from an encoded id stream (ids must index `vocab`).
pub fn build_graph_from_ids(ids: &[u32], vocab: Vocabulary) -> Result<CooccurrenceGraph> {
    let n = vocab.len() as u32;
    if let Some(bad) = ids.iter().find(|&&i| i >= n) {
        return Err(Error::config(format!("token id {bad} outside vocabulary of {n}")));
    }
    CooccurrenceGraph::from_pair_counts(vocab, count_adjacent_pairs(ids))
}

/// Build the graph from tokens; tokens outside `vocab` are dropped first.
pub fn build_graph(tokens: &[Token], vocab: Vocabulary) -> Result<CooccurrenceGraph> {
    let ids = vocab.encode(tokens);
    build_graph_from_ids(&ids, vocab)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    /// `|E| / (|V| (|V| - 1))`, self-loops included in `|E|`.
    pub density: f64,
    pub avg_out_degree: f64,
}

pub fn graph_stats(graph: &CooccurrenceGraph) -> GraphStats {
    let v = graph.node_count();
    let e = graph.edge_count();
    let density = if v < 2 {
        0.0
    } else {
        e as f64 / (v as f64 * (v as f64 - 1.0))
    };
    let avg_out_degree = if v == 0 { 0.0 } else { e as f64 / v as f64 };
    GraphStats {
        node_count: v,
        edge_count: e,
        density,
        avg_out_degree,
    }
}

impl GraphStats {
    pub const TSV_HEADER: &'static str = "nodes\tedges\tdensity\tavg_degree";
}

impl fmt::Display for GraphStats {
    /// Tab-separated `nodes edges density avg_degree`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{:.6e}\t{:.4}",
            self.node_count, self.edge_count, self.density, self.avg_out_degree
        )
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::corpus::{build_vocabulary, tokenize_str, TokenizerConfig};

    pub const STANHOPE: &str = "In truth, whatever is worth doing at all, is worth doing well; and nothing can be done well without attention.";

    /// The four-node example graph: a->b 3, a->d 1, b->b 5, c->b 2, c->d 7,
    /// d->a 3, d->b 1. Node ids 0..4 are a, b, c, d.
    pub fn four_node() -> CooccurrenceGraph {
        let vocab = Vocabulary::from_ordered(
            ["a", "b", "c", "d"]
                .iter()
                .zip([4, 5, 9, 4])
                .map(|(w, c)| (w.to_string(), c))
                .collect(),
        )
        .unwrap();
        let edges = [
            (0, 1, 3),
            (0, 3, 1),
            (1, 1, 5),
            (2, 1, 2),
            (2, 3, 7),
            (3, 0, 3),
            (3, 1, 1),
        ];
        CooccurrenceGraph::from_edges(vocab, edges).unwrap()
    }

    pub fn stanhope() -> (Vec<Token>, CooccurrenceGraph) {
        let toks = tokenize_str(STANHOPE, TokenizerConfig::default());
        let vocab = build_vocabulary(&toks, 1, None).unwrap();
        let g = build_graph(&toks, vocab).unwrap();
        (toks, g)
    }
}
