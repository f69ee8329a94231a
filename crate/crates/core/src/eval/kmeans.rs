//! Lloyd's k-means with k-means++ seeding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    /// Sum of squared distances to assigned centroids.
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check(points: &[f64], dim: usize, k: usize) -> Result<usize> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::config("points do not form whole rows of the given dimension"));
    }
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::config(format!("cannot form {k} clusters from {n} points")));
    }
    Ok(n)
}

/// One seeded run, using RNG stream `run` of `seed`.
pub fn kmeans_single(points: &[f64], dim: usize, k: usize, seed: u64, run: u64) -> Result<KMeansResult> {
    let n = check(points, dim, k)?;
    let row = |i: usize| &points[i * dim..(i + 1) * dim];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);

    // k-means++: first centre uniform, then proportional to squared distance
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(row(i), row(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                u -= d;
                if u < 0.0 && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // duplicates only: any point not yet chosen
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(row(i), row(next)));
        }
    }
    let mut centroids: Vec<f64> = chosen.iter().flat_map(|&c| row(c).iter().copied()).collect();

    let mut assignments = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (i, a) in assignments.iter_mut().enumerate() {
            let best = (0..k)
                .map(|c| (c, sq_dist(row(i), &centroids[c * dim..(c + 1) * dim])))
                .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b })
                .0;
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; k * dim];
        let mut sizes = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            sizes[a] += 1;
            for (s, x) in sums[a * dim..(a + 1) * dim].iter_mut().zip(row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            if sizes[c] == 0 {
                // re-seed an empty cluster at the point farthest from its centroid
                let far = (0..n)
                    .map(|i| {
                        (
                            i,
                            sq_dist(row(i), &centroids[assignments[i] * dim..(assignments[i] + 1) * dim]),
                        )
                    })
                    .fold((0, -1.0), |b, x| if x.1 > b.1 { x } else { b })
                    .0;
                centroids[c * dim..(c + 1) * dim].copy_from_slice(row(far));
                assignments[far] = c;
                continue;
            }
            for (m, s) in centroids[c * dim..(c + 1) * dim]
                .iter_mut()
                .zip(&sums[c * dim..(c + 1) * dim])
            {
                *m = s / sizes[c] as f64;
            }
        }
    }
    let inertia = assignments
        .iter()
        .enumerate()
        .map(|(i, &a)| sq_dist(row(i), &centroids[a * dim..(a + 1) * dim]))
        .sum();
    Ok(KMeansResult {
        assignments,
        centroids,
        inertia,
    })
}

/// Best of `restarts` runs by inertia; earliest run wins ties.
pub fn kmeans(points: &[f64], dim: usize, k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    check(points, dim, k)?;
    let runs: Vec<KMeansResult> = (0..restarts.max(1) as u64)
        .into_par_iter()
        .map(|r| kmeans_single(points, dim, k, seed, r))
        .collect::<Result<_>>()?;
    Ok(runs
        .into_iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
        .expect("at least one run"))
}
