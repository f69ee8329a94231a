//! Benchmark scoring: word similarity (Spearman ρ), analogy (P@1 with
//! 3CosAdd) and concept categorization (k-means purity).
//!
//! Items mentioning a word outside the embedding are skipped and counted
//! against coverage; no vector is ever substituted.

mod datasets;
mod kmeans;
mod metrics;

pub use datasets::{
    load_analogy, load_categorization, load_similarity, read_analogy, read_categorization, read_similarity,
    save_analogy, save_categorization, save_similarity, write_analogy, write_categorization, write_similarity,
    AnalogyDataset, CategorizationDataset, SimilarityDataset,
};
pub use kmeans::{kmeans, kmeans_single, KMeansResult, DEFAULT_RESTARTS};
pub use metrics::{average_ranks, cosine_similarity, purity, spearman_rho};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Similarity,
    Analogy,
    Categorization,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Similarity => "similarity",
            Task::Analogy => "analogy",
            Task::Categorization => "categorization",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(Task::Similarity),
            "analogy" => Ok(Task::Analogy),
            "categorization" => Ok(Task::Categorization),
            _ => Err(Error::config(format!(
                "unknown task `{s}` (expected similarity, analogy or categorization)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub dataset: String,
    /// ρ, P@1 or purity, computed over covered items only.
    pub score: f64,
    /// Covered items as a fraction of the dataset.
    pub coverage: f64,
    /// Dataset size.
    pub n: usize,
    pub skipped: usize,
}

impl EvalReport {
    fn new(task: Task, score: f64, n: usize, covered: usize) -> Self {
        EvalReport {
            task,
            dataset: String::new(),
            score,
            coverage: if n == 0 { 0.0 } else { covered as f64 / n as f64 },
            n,
            skipped: n - covered,
        }
    }

    pub fn with_dataset(mut self, name: impl Into<String>) -> Self {
        self.dataset = name.into();
        self
    }

    pub fn covered(&self) -> usize {
        self.n - self.skipped
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Fixed-width table with a header row.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut s = format!(
        "{:<15} {:<20} {:>8} {:>9} {:>7} {:>8}\n",
        "task", "dataset", "score", "coverage", "n", "skipped"
    );
    for r in reports {
        s += &format!(
            "{:<15} {:<20} {:>8.4} {:>9.4} {:>7} {:>8}\n",
            r.task.to_string(),
            r.dataset,
            r.score,
            r.coverage,
            r.n,
            r.skipped
        );
    }
    s
}

pub fn eval_similarity(emb: &EmbeddingMatrix, dataset: &SimilarityDataset) -> Result<EvalReport> {
    let mut predicted = Vec::new();
    let mut gold = Vec::new();
    for (a, b, score) in &dataset.pairs {
        if let (Some(u), Some(v)) = (emb.vector_of(a), emb.vector_of(b)) {
            predicted.push(cosine_similarity(u, v)?);
            gold.push(*score);
        }
    }
    if predicted.len() < 2 {
        return Err(Error::InsufficientCoverage {
            covered: predicted.len(),
            required: 2,
        });
    }
    let rho = spearman_rho(&predicted, &gold)?;
    Ok(EvalReport::new(
        Task::Similarity,
        rho,
        dataset.pairs.len(),
        predicted.len(),
    ))
}

/// Unit-length copies of the input vectors; zero rows stay zero.
fn unit_rows(emb: &EmbeddingMatrix) -> Vec<f64> {
    let d = emb.dim();
    let mut out: Vec<f64> = emb.input_vectors().iter().map(|&x| x as f64).collect();
    for row in out.chunks_mut(d) {
        let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            row.iter_mut().for_each(|x| *x /= n);
        }
    }
    out
}

fn predict_with(units: &[f64], emb: &EmbeddingMatrix, q: [u32; 3]) -> Option<u32> {
    let d = emb.dim();
    let [a, b, c] = q.map(|i| emb.vector(i));
    let target: Vec<f64> = (0..d).map(|k| b[k] as f64 - a[k] as f64 + c[k] as f64).collect();
    if target.iter().all(|&x| x == 0.0) {
        return None;
    }
    // |target| is common to every candidate, so the dot with unit rows ranks
    // candidates exactly as cosine does
    let mut best: Option<(u32, f64)> = None;
    for (w, row) in units.chunks(d).enumerate() {
        let w = w as u32;
        if q.contains(&w) || row.iter().all(|&x| x == 0.0) {
            continue;
        }
        let s: f64 = row.iter().zip(&target).map(|(x, y)| x * y).sum();
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((w, s));
        }
    }
    best.map(|(w, _)| w)
}

/// 3CosAdd: the word maximizing `cos(w, v_b - v_a + v_c)`, excluding a, b, c.
pub fn predict_analogy(emb: &EmbeddingMatrix, a: &str, b: &str, c: &str) -> Option<String> {
    let q = [emb.id(a)?, emb.id(b)?, emb.id(c)?];
    predict_with(&unit_rows(emb), emb, q).map(|w| emb.word(w).to_owned())
}

pub fn eval_analogy(emb: &EmbeddingMatrix, dataset: &AnalogyDataset) -> Result<EvalReport> {
    let units = unit_rows(emb);
    let covered: Vec<([u32; 3], u32)> = dataset
        .quads
        .iter()
        .filter_map(|q| Some(([emb.id(&q[0])?, emb.id(&q[1])?, emb.id(&q[2])?], emb.id(&q[3])?)))
        .collect();
    if covered.is_empty() {
        return Err(Error::InsufficientCoverage {
            covered: 0,
            required: 1,
        });
    }
    let hits = covered
        .par_iter()
        .filter(|(q, d)| predict_with(&units, emb, *q) == Some(*d))
        .count();
    Ok(EvalReport::new(
        Task::Analogy,
        hits as f64 / covered.len() as f64,
        dataset.quads.len(),
        covered.len(),
    ))
}

pub fn eval_categorization(emb: &EmbeddingMatrix, dataset: &CategorizationDataset) -> Result<EvalReport> {
    eval_categorization_with(emb, dataset, 1, DEFAULT_RESTARTS)
}

/// Clusters the unit-normalized vectors of covered words into as many
/// clusters as the dataset has categories and reports purity.
pub fn eval_categorization_with(
    emb: &EmbeddingMatrix,
    dataset: &CategorizationDataset,
    seed: u64,
    restarts: usize,
) -> Result<EvalReport> {
    let categories = dataset.categories();
    let k = categories.len();
    let units = unit_rows(emb);
    let d = emb.dim();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (w, c) in &dataset.items {
        if let Some(i) = emb.id(w) {
            let i = i as usize;
            points.extend_from_slice(&units[i * d..(i + 1) * d]);
            labels.push(categories.iter().position(|x| x == c).expect("category listed"));
        }
    }
    if labels.len() < k {
        return Err(Error::InsufficientCoverage {
            covered: labels.len(),
            required: k,
        });
    }
    let clusters = kmeans(&points, d, k, seed, restarts)?;
    Ok(EvalReport::new(
        Task::Categorization,
        purity(&clusters.assignments, &labels),
        dataset.items.len(),
        labels.len(),
    ))
}
