use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub const DEFAULT_IDF_WINDOW: usize = 200;

/// How node start weights are derived from the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Term frequency.
    #[default]
    Tf,
    /// Term frequency damped by inverse document frequency, where a
    /// "document" is a fixed-size block of the token stream.
    TfIdf,
}

impl std::str::FromStr for WeightMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tf" => Ok(WeightMode::Tf),
            "tfidf" | "tf-idf" => Ok(WeightMode::TfIdf),
            other => Err(format!("unknown weight mode `{other}` (expected tf or tfidf)")),
        }
    }
}

/// `n_v / Σ n_k` for every vocabulary word.
pub fn compute_tf_node_weights(vocab: &Vocabulary) -> Result<Vec<f64>> {
    let total = vocab.total_count();
    if total == 0 {
        return Err(Error::config("vocabulary has zero total count"));
    }
    let total = total as f64;
    Ok(vocab.counts().iter().map(|&c| c as f64 / total).collect())
}

/// Unnormalized TF-IDF scores `(n_v / Σ n_k) · ln(|C| / df(v))`.
///
/// The id stream is cut into consecutive non-overlapping blocks of
/// `window` tokens (the last may be shorter); `|C|` is the block count and
/// `df(v)` the number of blocks containing `v`.
pub fn tfidf_scores(ids: &[u32], vocab: &Vocabulary, window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::config("IDF window must be at least 1"));
    }
    if ids.is_empty() {
        return Err(Error::config("TF-IDF weights need a non-empty token stream"));
    }
    let n = vocab.len();
    let mut last_block = vec![usize::MAX; n];
    let mut df = vec![0u64; n];
    for (i, &id) in ids.iter().enumerate() {
        let block = i / window;
        let slot = id as usize;
        if slot >= n {
            return Err(Error::config(format!("token id {id} outside vocabulary of {n}")));
        }
        if last_block[slot] != block {
            last_block[slot] = block;
            df[slot] += 1;
        }
    }
    let blocks = ids.len().div_ceil(window) as f64;
    let tf = compute_tf_node_weights(vocab)?;
    tf.iter()
        .zip(&df)
        .enumerate()
        .map(|(v, (&tf, &df))| {
            if df == 0 {
                Err(Error::Internal(format!(
                    "word `{}` is in the vocabulary but never occurs in the stream",
                    vocab.word(v as u32)
                )))
            } else {
                Ok(tf * (blocks / df as f64).ln())
            }
        })
        .collect()
}

/// TF-IDF scores renormalized to sum to one.
pub fn compute_tfidf_node_weights(ids: &[u32], vocab: &Vocabulary, window: usize) -> Result<Vec<f64>> {
    let mut w = tfidf_scores(ids, vocab, window)?;
    let sum: f64 = w.iter().sum();
    if sum <= 0.0 {
        return Err(Error::config(format!(
            "all TF-IDF weights are zero: every word occurs in every block of {window} tokens"
        )));
    }
    w.iter_mut().for_each(|x| *x /= sum);
    Ok(w)
}
