//! Train skip-gram embeddings on walks over a small synthetic corpus where
//! two words share every context, and compare their similarity to a
//! control word.
//!
//!     cargo run --release --example train_embeddings

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordgraph::corpus::{build_vocabulary, tokenize_str, TokenizerConfig};
use wordgraph::embed::{train_with_report, TrainConfig};
use wordgraph::eval::cosine_similarity;
use wordgraph::graph::{build_graph, compute_tf_node_weights};
use wordgraph::walk::{generate_corpus, WalkConfig};

fn main() -> wordgraph::Result<()> {
    // "coffee" and "tea" are interchangeable; "engine" lives elsewhere
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let drink = ["coffee", "tea"];
    let mut text = String::new();
    for _ in 0..3000 {
        let s = match rng.random_range(0..3) {
            0 => format!("i drink hot {} every morning .", drink[rng.random_range(0..2)]),
            1 => format!("a cup of {} with milk .", drink[rng.random_range(0..2)]),
            _ => "the engine needs oil and a new belt .".to_string(),
        };
        text.push_str(&s);
        text.push(' ');
    }
    let tokens = tokenize_str(&text, TokenizerConfig::default());
    let mut graph = build_graph(&tokens, build_vocabulary(&tokens, 1, None)?)?;
    graph.set_node_weights(compute_tf_node_weights(graph.vocab())?)?;

    let walks = generate_corpus(
        &graph,
        &WalkConfig {
            walk_length: 40,
            walks_per_node: Some(50),
            q: 0.5,
            ..Default::default()
        },
    )?;
    let config = TrainConfig {
        dimension: 32,
        window: 4,
        epochs: 5,
        ..Default::default()
    };
    let (emb, report) = train_with_report(&walks, graph.vocab(), &config)?;
    println!("{} walks, {} training pairs", walks.len(), report.examples);
    for (e, loss) in report.epoch_losses.iter().enumerate() {
        println!("epoch {e}: mean loss {loss:.4}");
    }
    let cos = |a, b| cosine_similarity(emb.vector_of(a).unwrap(), emb.vector_of(b).unwrap()).unwrap();
    println!("cos(coffee, tea)    = {:.3}", cos("coffee", "tea"));
    println!("cos(coffee, engine) = {:.3}", cos("coffee", "engine"));
    Ok(())
}
