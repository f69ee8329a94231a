//! Word embeddings learned from a word co-occurrence graph.
//!
//! The pipeline has three stages:
//!
//! 1. [`graph`]: scan the corpus once, linking each word to the word that
//!    follows it, and weight every node by TF or TF-IDF.
//! 2. [`walk`]: root a number of walks at each node in proportion to its
//!    weight and run p/q-biased second-order random walks over the graph.
//! 3. [`embed`]: train skip-gram with negative sampling on the walks.
//!
//! [`eval`] scores the resulting vectors on categorization, similarity and
//! analogy benchmarks, and [`pipeline`] wires everything together behind a
//! JSON config.

mod binfmt;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
pub mod pipeline;
pub mod walk;

pub use error::{Error, ErrorClass, Result};
