//! End-to-end run from a config: graph, walks, embeddings and timings,
//! written to a temporary directory.
//!
//!     cargo run --release --example pipeline

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordgraph::embed::TrainConfig;
use wordgraph::graph::WeightMode;
use wordgraph::pipeline::{run_pipeline, CorpusConfig, GraphConfig, PipelineConfig};
use wordgraph::walk::WalkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("wordgraph-example-pipeline");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("corpus.txt");
    // topical bursts, so some words are rare within a TF-IDF block
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let topics = [
        ["the", "fox", "jumps", "over", "a", "lazy", "dog"],
        ["the", "ship", "sails", "across", "a", "calm", "sea"],
        ["the", "cook", "stirs", "a", "pot", "of", "soup"],
    ];
    let mut text = String::new();
    for _ in 0..300 {
        let topic = &topics[rng.random_range(0..topics.len())];
        for _ in 0..rng.random_range(2..6) {
            text.push_str(&topic.join(" "));
            text.push_str(" . ");
        }
    }
    std::fs::write(&input, text)?;

    let config = PipelineConfig {
        seed: Some(42),
        output_dir: dir.join("out"),
        corpus: CorpusConfig {
            inputs: vec![input],
            min_count: 1,
            ..Default::default()
        },
        graph: GraphConfig {
            weight_mode: WeightMode::TfIdf,
            idf_window: 20,
        },
        walk: WalkConfig {
            walk_length: 30,
            walks_per_node: Some(20),
            ..Default::default()
        },
        train: TrainConfig {
            dimension: 16,
            window: 5,
            epochs: 3,
            ..Default::default()
        },
        ..Default::default()
    };
    println!("{}", config.to_json_pretty());

    let out = run_pipeline(&config)?;
    println!(
        "{} corpus tokens -> {} nodes, {} edges",
        out.token_count, out.graph_stats.node_count, out.graph_stats.edge_count
    );
    println!("{} walks ({} tokens)", out.walk_count, out.walk_tokens);
    for t in &out.timings {
        println!("{:<12} {:.3}s", t.stage, t.seconds);
    }
    println!("embeddings in {}", out.artifacts.embeddings.display());
    Ok(())
}
