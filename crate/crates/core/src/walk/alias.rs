//! Walker/Vose alias method: O(n) construction, O(1) exact sampling.

use rand::Rng;

use crate::error::{Error, Result};

/// Fill `prob`/`alias` (both `weights.len()` long) for the given weights.
///
/// `alias` entries are local indices into `weights`.
pub(crate) fn build_into(weights: &[f64], prob: &mut [f64], alias: &mut [u32]) -> Result<()> {
    let n = weights.len();
    debug_assert!(prob.len() == n && alias.len() == n);
    if n == 0 {
        return Err(Error::config("alias table needs at least one weight"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::config("alias weights must be finite and non-negative"));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::config("alias weights sum to zero"));
    }
    let scale = n as f64 / sum;
    let mut small = Vec::new();
    let mut large = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        prob[i] = w * scale;
        alias[i] = i as u32;
        if prob[i] < 1.0 {
            small.push(i);
        } else {
            large.push(i);
        }
    }
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        alias[s] = l as u32;
        prob[l] = (prob[l] + prob[s]) - 1.0;
        if prob[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    // Whatever is left is at 1 up to rounding.
    for i in small.into_iter().chain(large) {
        prob[i] = 1.0;
    }
    Ok(())
}

#[inline]
pub(crate) fn sample_slot<R: Rng + ?Sized>(prob: &[f64], alias: &[u32], rng: &mut R) -> usize {
    let slot = rng.random_range(0..prob.len());
    if rng.random::<f64>() < prob[slot] {
        slot
    } else {
        alias[slot] as usize
    }
}

/// O(1) sampler over a fixed discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
    /// Outcome labels; empty means outcome `i` is slot `i`.
    support: Vec<u32>,
}

impl AliasTable {
    /// Table over outcomes `0..weights.len()`.
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut prob = vec![0.0; weights.len()];
        let mut alias = vec![0u32; weights.len()];
        build_into(weights, &mut prob, &mut alias)?;
        Ok(AliasTable {
            prob,
            alias,
            support: Vec::new(),
        })
    }

    /// Table whose outcomes are the labels in `support` (e.g. node ids).
    pub fn with_support(weights: &[f64], support: Vec<u32>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::config("support and weights differ in length"));
        }
        let mut t = Self::new(weights)?;
        t.support = support;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn prob(&self) -> &[f64] {
        &self.prob
    }

    pub fn alias(&self) -> &[u32] {
        &self.alias
    }

    pub fn support(&self) -> Option<&[u32]> {
        (!self.support.is_empty()).then_some(self.support.as_slice())
    }

    /// Draw the index of an outcome (position in the input weights).
    #[inline]
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_slot(&self.prob, &self.alias, rng)
    }

    /// Draw an outcome label.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let i = self.sample_index(rng);
        if self.support.is_empty() {
            i as u32
        } else {
            self.support[i]
        }
    }

    /// Exact outcome probabilities implied by the table, by index.
    pub fn implied_probabilities(&self) -> Vec<f64> {
        implied_probabilities(&self.prob, &self.alias)
    }
}

pub(crate) fn implied_probabilities(prob: &[f64], alias: &[u32]) -> Vec<f64> {
    let n = prob.len() as f64;
    let mut p: Vec<f64> = prob.iter().map(|&x| x / n).collect();
    for (i, &a) in alias.iter().enumerate() {
        p[a as usize] += (1.0 - prob[i]) / n;
    }
    p
}
