use crate::error::{Error, Result};

pub fn cosine_similarity(u: &[f32], v: &[f32]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::config(format!("dimension mismatch: {} vs {}", u.len(), v.len())));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman_rho(predicted: &[f64], gold: &[f64]) -> Result<f64> {
    if predicted.len() != gold.len() {
        return Err(Error::config(format!(
            "length mismatch: {} predictions, {} gold scores",
            predicted.len(),
            gold.len()
        )));
    }
    if predicted.len() < 2 {
        return Err(Error::InsufficientCoverage {
            covered: predicted.len(),
            required: 2,
        });
    }
    pearson(&average_ranks(predicted), &average_ranks(gold))
}

/// Cluster purity: the share of items belonging to their cluster's majority
/// category. Labels on either side are arbitrary integers.
pub fn purity(clusters: &[usize], categories: &[usize]) -> f64 {
    assert_eq!(clusters.len(), categories.len());
    if clusters.is_empty() {
        return 0.0;
    }
    let mut table = rustc_hash::FxHashMap::<(usize, usize), usize>::default();
    for (&c, &k) in clusters.iter().zip(categories) {
        *table.entry((c, k)).or_default() += 1;
    }
    let mut best = rustc_hash::FxHashMap::<usize, usize>::default();
    for (&(c, _), &n) in &table {
        let b = best.entry(c).or_default();
        *b = (*b).max(n);
    }
    best.values().sum::<usize>() as f64 / clusters.len() as f64
}
