//! Sampling the walk corpus.
//!
//! Each node `v` roots `max(min_walks_per_node, floor(n * PW[v]))` walks,
//! where `PW` are the graph's normalized node weights and `n` the total walk
//! budget. A walk takes up to `walk_length` steps after its start node: the
//! first step is first-order (edge-weight proportional), later steps are
//! second-order p/q-biased, and a sink ends the walk early. Walks shorter
//! than two tokens are dropped.
//!
//! Every walk draws from its own ChaCha8 stream keyed by
//! `(seed, node, walk index)`, so the corpus depends only on the graph and
//! the config, never on scheduling.

mod alias;
mod corpus;
mod transition;

pub use alias::AliasTable;
pub use corpus::WalkCorpus;
pub use transition::{
    alpha, distance, first_order_distribution, transition_distribution, Distance, Walker, MAX_REJECTIONS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CooccurrenceGraph;

pub const DEFAULT_WALKS_PER_NODE: u64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkConfig {
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    /// Steps taken after the start node.
    pub walk_length: usize,
    /// Total walk budget `n`. Mutually exclusive with `walks_per_node`.
    pub total_walks: Option<u64>,
    /// Budget as a multiple of `|V|`; 30 when neither budget is set.
    pub walks_per_node: Option<u64>,
    pub min_walks_per_node: u64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            p: 1.0,
            q: 0.001,
            walk_length: 200,
            total_walks: None,
            walks_per_node: None,
            min_walks_per_node: 1,
            seed: 1,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::config(format!("p must be positive, got {}", self.p)));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::config(format!("q must be positive, got {}", self.q)));
        }
        if self.walk_length < 1 {
            return Err(Error::config("walk_length must be at least 1"));
        }
        if self.total_walks.is_some() && self.walks_per_node.is_some() {
            return Err(Error::config("set total_walks or walks_per_node, not both"));
        }
        Ok(())
    }

    /// The total budget `n` for a graph with `node_count` nodes.
    pub fn resolved_total_walks(&self, node_count: usize) -> u64 {
        self.total_walks
            .unwrap_or_else(|| self.walks_per_node.unwrap_or(DEFAULT_WALKS_PER_NODE) * node_count as u64)
    }
}

/// Per-node walk counts: `max(min_walks, floor(total_walks * pw[v]))`.
pub fn number_walks(pw: &[f64], total_walks: u64, min_walks: u64) -> Vec<u64> {
    let n = total_walks as f64;
    pw.iter().map(|&w| ((n * w).floor() as u64).max(min_walks)).collect()
}

/// RNG stream for walk `walk` rooted at `node`.
pub fn walk_rng(seed: u64, node: u32, walk: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((node as u64) << 32 | walk as u64);
    rng
}

/// A single walk from `start`, drawn from stream `(seed, start, 0)`.
pub fn random_walk(graph: &CooccurrenceGraph, start: u32, config: &WalkConfig) -> Result<Vec<u32>> {
    config.validate()?;
    if start as usize >= graph.node_count() {
        return Err(Error::config(format!("start node {start} not in graph")));
    }
    let walker = Walker::new(graph, config.p, config.q)?;
    let mut out = Vec::with_capacity(config.walk_length + 1);
    walker.walk_into(
        start,
        config.walk_length,
        &mut walk_rng(config.seed, start, 0),
        &mut out,
    );
    Ok(out)
}

/// Generate the full walk corpus on the current rayon pool.
///
/// Output is ordered by (start node, walk index) for any thread count.
pub fn generate_corpus(graph: &CooccurrenceGraph, config: &WalkConfig) -> Result<WalkCorpus> {
    config.validate()?;
    if graph.node_count() == 0 {
        return Err(Error::config("cannot walk an empty graph"));
    }
    let pw = graph
        .node_weights()
        .ok_or_else(|| Error::config("graph has no node weights; compute TF or TF-IDF first"))?;
    let counts = number_walks(
        pw,
        config.resolved_total_walks(graph.node_count()),
        config.min_walks_per_node,
    );
    if let Some(&c) = counts.iter().find(|&&c| c > u32::MAX as u64) {
        return Err(Error::config(format!(
            "{c} walks for one node exceeds the supported maximum"
        )));
    }
    let walker = Walker::new(graph, config.p, config.q)?;

    const BLOCK: usize = 2048;
    let n = graph.node_count();
    let mut corpus = WalkCorpus::new();
    for block_start in (0..n).step_by(BLOCK) {
        let block_end = (block_start + BLOCK).min(n);
        let parts: Vec<WalkCorpus> = (block_start..block_end)
            .into_par_iter()
            .map(|u| {
                let u = u as u32;
                let mut part = WalkCorpus::new();
                let mut buf = Vec::with_capacity(config.walk_length + 1);
                for i in 0..counts[u as usize] as u32 {
                    buf.clear();
                    let mut rng = walk_rng(config.seed, u, i);
                    walker.walk_into(u, config.walk_length, &mut rng, &mut buf);
                    if buf.len() >= 2 {
                        part.push(&buf);
                    }
                }
                part
            })
            .collect();
        for part in parts {
            corpus.extend(&part);
        }
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::graph::{compute_tf_node_weights, fixtures};

    #[test]
    fn budget_examples() {
        assert_eq!(number_walks(&[2.0 / 20.0], 200, 1), [20]);
        assert_eq!(number_walks(&[0.3, 0.7], 0, 0), [0, 0]);
        assert_eq!(number_walks(&[0.001, 0.999], 100, 1), [1, 99]);
    }

    #[test]
    fn config_validation() {
        let ok = WalkConfig::default();
        ok.validate().unwrap();
        assert!(WalkConfig { p: 0.0, ..ok.clone() }.validate().is_err());
        assert!(WalkConfig { q: -2.0, ..ok.clone() }.validate().is_err());
        assert!(WalkConfig {
            walk_length: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(WalkConfig {
            total_walks: Some(5),
            walks_per_node: Some(5),
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert_eq!(ok.resolved_total_walks(7), 210);
        assert_eq!(
            WalkConfig {
                walks_per_node: Some(10),
                ..ok.clone()
            }
            .resolved_total_walks(7),
            70
        );
        assert_eq!(
            WalkConfig {
                total_walks: Some(5),
                ..ok
            }
            .resolved_total_walks(7),
            5
        );
    }

    #[test]
    fn stanhope_walk_can_reach_attention() {
        let (_, g) = fixtures::stanhope();
        let v = g.vocab();
        let ids: Vec<u32> = "whatever is worth doing well without attention"
            .split(' ')
            .map(|w| v.id(w).unwrap())
            .collect();
        // every hop of the example walk is an edge of the graph
        assert!(ids.windows(2).all(|e| g.has_edge(e[0], e[1])));
        // and it is reachable: it has positive probability under p=q=1
        let p: f64 = ids
            .windows(2)
            .map(|e| g.weight(e[0], e[1]) as f64 / g.neighbors(e[0]).1.iter().sum::<u64>() as f64)
            .product();
        assert!(p > 0.0);
        // "attention" is a sink, so any walk reaching it stops there
        let config = WalkConfig {
            p: 1.0,
            q: 1.0,
            walk_length: 50,
            ..Default::default()
        };
        let mut g = g;
        g.set_node_weights(compute_tf_node_weights(g.vocab()).unwrap()).unwrap();
        let corpus = generate_corpus(&g, &config).unwrap();
        let attention = g.vocab().id("attention").unwrap();
        for w in corpus.iter() {
            if let Some(pos) = w.iter().position(|&x| x == attention) {
                assert_eq!(pos, w.len() - 1);
            }
        }
    }

    #[test]
    fn sink_start_gives_single_token() {
        let (_, g) = fixtures::stanhope();
        let attention = g.vocab().id("attention").unwrap();
        let w = random_walk(&g, attention, &WalkConfig::default()).unwrap();
        assert_eq!(w, [attention]);
    }

    #[test]
    fn self_loop_graph() {
        let v = Vocabulary::from_ordered(vec![("a".into(), 3)]).unwrap();
        let mut g = CooccurrenceGraph::from_edges(v, [(0, 0, 2)]).unwrap();
        g.set_node_weights(vec![1.0]).unwrap();
        let config = WalkConfig {
            walk_length: 5,
            walks_per_node: Some(1),
            ..Default::default()
        };
        let c = generate_corpus(&g, &config).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(0), [0; 6]);
    }

    #[test]
    fn requires_node_weights() {
        let g = fixtures::four_node();
        assert!(matches!(
            generate_corpus(&g, &WalkConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn corpus_order_and_bounds() {
        let mut g = fixtures::four_node();
        g.set_node_weights(compute_tf_node_weights(g.vocab()).unwrap()).unwrap();
        let config = WalkConfig {
            walk_length: 7,
            total_walks: Some(40),
            q: 0.5,
            ..Default::default()
        };
        let c = generate_corpus(&g, &config).unwrap();
        let counts = number_walks(g.node_weights().unwrap(), 40, 1);
        assert_eq!(c.len() as u64, counts.iter().sum::<u64>());
        assert!(c.token_count() as u64 <= counts.iter().sum::<u64>() * 8);
        let starts: Vec<u32> = c.iter().map(|w| w[0]).collect();
        assert!(starts.windows(2).all(|s| s[0] <= s[1]));
        for w in c.iter() {
            assert!((2..=8).contains(&w.len()));
            assert!(w.windows(2).all(|e| g.has_edge(e[0], e[1])));
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut g = fixtures::four_node();
        g.set_node_weights(compute_tf_node_weights(g.vocab()).unwrap()).unwrap();
        let config = WalkConfig {
            walk_length: 30,
            total_walks: Some(500),
            p: 2.0,
            q: 0.25,
            ..Default::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generate_corpus(&g, &config).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert_eq!(a, run(4));
        let other = generate_corpus(
            &g,
            &WalkConfig {
                seed: 2,
                ..config.clone()
            },
        )
        .unwrap();
        assert_ne!(a, other);
    }
}
