//! Second-order (p, q)-biased transitions on a directed weighted graph.
//!
//! Having crossed `t -> v`, the unnormalized weight of moving on to an
//! out-neighbor `x` of `v` is `alpha(t, x) * W[v][x]` where
//!
//! | `d(t, x)` | condition           | `alpha` |
//! |-----------|---------------------|---------|
//! | 0         | `x == t`            | `1/p`   |
//! | 1         | edge `t -> x` exists | `1`     |
//! | 2         | otherwise           | `1/q`   |
//!
//! Distance 1 follows edge direction: only an out-edge of `t` counts.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::CooccurrenceGraph;

use super::alias::{build_into, implied_probabilities, sample_slot};

/// Consecutive rejections before falling back to exact normalization.
pub const MAX_REJECTIONS: usize = 32;

/// Distance from the previous node `t` to a candidate `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    Return = 0,
    Neighbor = 1,
    Outward = 2,
}

impl TryFrom<u8> for Distance {
    type Error = Error;

    fn try_from(d: u8) -> Result<Self> {
        match d {
            0 => Ok(Distance::Return),
            1 => Ok(Distance::Neighbor),
            2 => Ok(Distance::Outward),
            _ => Err(Error::config(format!("distance must be 0, 1 or 2, got {d}"))),
        }
    }
}

/// Search bias for a candidate at distance `d` from the previous node.
#[inline]
pub fn alpha(p: f64, q: f64, d: Distance) -> f64 {
    match d {
        Distance::Return => 1.0 / p,
        Distance::Neighbor => 1.0,
        Distance::Outward => 1.0 / q,
    }
}

#[inline]
pub fn distance(graph: &CooccurrenceGraph, prev: u32, x: u32) -> Distance {
    if x == prev {
        Distance::Return
    } else if graph.has_edge(prev, x) {
        Distance::Neighbor
    } else {
        Distance::Outward
    }
}

/// Normalized first-order step distribution out of `curr`, proportional to
/// edge weight. `None` for a sink.
pub fn first_order_distribution(graph: &CooccurrenceGraph, curr: u32) -> Option<Vec<(u32, f64)>> {
    let (targets, weights) = graph.neighbors(curr);
    if targets.is_empty() {
        return None;
    }
    let z: f64 = weights.iter().map(|&w| w as f64).sum();
    Some(targets.iter().zip(weights).map(|(&x, &w)| (x, w as f64 / z)).collect())
}

/// Normalized second-order step distribution out of `curr` after arriving
/// from `prev`. `None` for a sink.
pub fn transition_distribution(
    graph: &CooccurrenceGraph,
    prev: u32,
    curr: u32,
    p: f64,
    q: f64,
) -> Option<Vec<(u32, f64)>> {
    let (targets, weights) = graph.neighbors(curr);
    if targets.is_empty() {
        return None;
    }
    let pi: Vec<f64> = targets
        .iter()
        .zip(weights)
        .map(|(&x, &w)| alpha(p, q, distance(graph, prev, x)) * w as f64)
        .collect();
    let z: f64 = pi.iter().sum();
    Some(targets.iter().zip(pi).map(|(&x, w)| (x, w / z)).collect())
}

/// Step sampler over a graph: one first-order alias table per node, laid out
/// parallel to the CSR edge arrays, plus rejection sampling for the
/// second-order bias.
pub struct Walker<'g> {
    graph: &'g CooccurrenceGraph,
    prob: Vec<f64>,
    alias: Vec<u32>,
    p: f64,
    q: f64,
    alpha_max: f64,
    unbiased: bool,
}

impl<'g> Walker<'g> {
    pub fn new(graph: &'g CooccurrenceGraph, p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite()) {
            return Err(Error::config(format!("p and q must be positive, got p={p} q={q}")));
        }
        let e = graph.edge_count();
        let mut prob = vec![0.0; e];
        let mut alias = vec![0u32; e];
        let mut scratch = Vec::new();
        for u in 0..graph.node_count() as u32 {
            let r = graph.out_range(u);
            if r.is_empty() {
                continue;
            }
            scratch.clear();
            scratch.extend(graph.weights()[r.clone()].iter().map(|&w| w as f64));
            build_into(&scratch, &mut prob[r.clone()], &mut alias[r])?;
        }
        Ok(Walker {
            graph,
            prob,
            alias,
            p,
            q,
            alpha_max: 1f64.max(1.0 / p).max(1.0 / q),
            unbiased: p == 1.0 && q == 1.0,
        })
    }

    pub fn graph(&self) -> &'g CooccurrenceGraph {
        self.graph
    }

    /// First-order step out of `curr`, proportional to edge weight.
    #[inline]
    pub fn first_step<R: Rng + ?Sized>(&self, curr: u32, rng: &mut R) -> Option<u32> {
        let r = self.graph.out_range(curr);
        if r.is_empty() {
            return None;
        }
        let slot = sample_slot(&self.prob[r.clone()], &self.alias[r.clone()], rng);
        Some(self.graph.targets()[r.start + slot])
    }

    /// Second-order step out of `curr` having arrived from `prev`.
    ///
    /// Proposes from the first-order table and accepts with probability
    /// `alpha / alpha_max`; after [`MAX_REJECTIONS`] misses it samples the
    /// exact normalized distribution instead. Either way the draw follows
    /// the second-order distribution exactly.
    pub fn step<R: Rng + ?Sized>(&self, prev: u32, curr: u32, rng: &mut R) -> Option<u32> {
        if self.unbiased {
            return self.first_step(curr, rng);
        }
        let r = self.graph.out_range(curr);
        if r.is_empty() {
            return None;
        }
        let targets = &self.graph.targets()[r.clone()];
        let prob = &self.prob[r.clone()];
        let alias = &self.alias[r.clone()];
        for _ in 0..MAX_REJECTIONS {
            let x = targets[sample_slot(prob, alias, rng)];
            let a = alpha(self.p, self.q, distance(self.graph, prev, x));
            if rng.random::<f64>() * self.alpha_max < a {
                return Some(x);
            }
        }
        self.exact_step(prev, curr, rng)
    }

    fn exact_step<R: Rng + ?Sized>(&self, prev: u32, curr: u32, rng: &mut R) -> Option<u32> {
        let (targets, weights) = self.graph.neighbors(curr);
        let pi = |i: usize| alpha(self.p, self.q, distance(self.graph, prev, targets[i])) * weights[i] as f64;
        let z: f64 = (0..targets.len()).map(pi).sum();
        let mut u = rng.random::<f64>() * z;
        for (i, &x) in targets.iter().enumerate() {
            u -= pi(i);
            if u < 0.0 {
                return Some(x);
            }
        }
        targets.last().copied()
    }

    /// Exact output law of [`Walker::step`] (or of [`Walker::first_step`]
    /// when `prev` is `None`), derived from the stored alias tables rather
    /// than from the graph weights: proposals follow the tables, acceptance
    /// is `alpha / alpha_max`, and after [`MAX_REJECTIONS`] misses the exact
    /// fallback takes over.
    pub fn step_distribution(&self, prev: Option<u32>, curr: u32) -> Option<Vec<(u32, f64)>> {
        let r = self.graph.out_range(curr);
        if r.is_empty() {
            return None;
        }
        let targets = &self.graph.targets()[r.clone()];
        let proposal = implied_probabilities(&self.prob[r.clone()], &self.alias[r]);
        let prev = match prev {
            Some(t) if !self.unbiased => t,
            _ => return Some(targets.iter().copied().zip(proposal).collect()),
        };
        let accept: Vec<f64> = targets
            .iter()
            .map(|&x| alpha(self.p, self.q, distance(self.graph, prev, x)) / self.alpha_max)
            .collect();
        let a: f64 = proposal.iter().zip(&accept).map(|(q, a)| q * a).sum();
        let miss_all = (1.0 - a).powi(MAX_REJECTIONS as i32);
        let exact = transition_distribution(self.graph, prev, curr, self.p, self.q)?;
        Some(
            targets
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let accepted = proposal[i] * accept[i] * (1.0 - miss_all) / a;
                    (x, accepted + miss_all * exact[i].1)
                })
                .collect(),
        )
    }

    /// Append a walk of at most `steps` transitions from `start` to `out`.
    pub fn walk_into<R: Rng + ?Sized>(&self, start: u32, steps: usize, rng: &mut R, out: &mut Vec<u32>) {
        out.push(start);
        if steps == 0 {
            return;
        }
        let Some(mut curr) = self.first_step(start, rng) else {
            return;
        };
        out.push(curr);
        let mut prev = start;
        for _ in 1..steps {
            match self.step(prev, curr, rng) {
                Some(next) => {
                    out.push(next);
                    prev = curr;
                    curr = next;
                }
                None => break,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::four_node;
    use rand::SeedableRng;

    fn as_map(d: Vec<(u32, f64)>) -> std::collections::BTreeMap<u32, f64> {
        d.into_iter().collect()
    }

    #[test]
    fn alpha_values() {
        assert_eq!(alpha(1.0, 0.001, Distance::Outward), 1000.0);
        for d in 0..3u8 {
            assert_eq!(alpha(1.0, 1.0, Distance::try_from(d).unwrap()), 1.0);
        }
        assert_eq!(alpha(2.0, 0.5, Distance::Return), 0.5);
        assert!(Distance::try_from(3).is_err());
    }

    #[test]
    fn four_node_distributions() {
        let g = four_node();
        let (a, b, d) = (0, 1, 3);
        let m = as_map(transition_distribution(&g, d, a, 1.0, 1.0).unwrap());
        assert!((m[&b] - 0.75).abs() < 1e-15 && (m[&d] - 0.25).abs() < 1e-15);

        let m = as_map(transition_distribution(&g, d, a, 2.0, 0.5).unwrap());
        assert!((m[&b] - 6.0 / 7.0).abs() < 1e-15);
        assert!((m[&d] - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn unbiased_ignores_previous_node() {
        let g = four_node();
        for curr in 0..4 {
            let first = first_order_distribution(&g, curr).unwrap();
            for prev in 0..4 {
                assert_eq!(transition_distribution(&g, prev, curr, 1.0, 1.0).unwrap(), first);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = four_node();
        assert!(Walker::new(&g, 0.0, 1.0).is_err());
        assert!(Walker::new(&g, 1.0, -1.0).is_err());
        assert!(Walker::new(&g, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn walks_follow_edges() {
        let g = four_node();
        let w = Walker::new(&g, 0.5, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut out = Vec::new();
        for start in 0..4 {
            out.clear();
            w.walk_into(start, 50, &mut rng, &mut out);
            assert_eq!(out.len(), 51);
            assert!(out.windows(2).all(|e| g.has_edge(e[0], e[1])));
        }
    }

    #[test]
    fn exact_fallback_matches_distribution() {
        // Force the exact path by sampling it directly.
        let g = four_node();
        let w = Walker::new(&g, 2.0, 0.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let n = 200_000;
        let mut hits = 0;
        for _ in 0..n {
            if w.exact_step(3, 0, &mut rng) == Some(1) {
                hits += 1;
            }
        }
        let p = 6.0 / 7.0;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - n as f64 * p).abs() < 4.0 * sd);
    }
}
