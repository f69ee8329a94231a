//! Repeat a corpus 1x, 2x and 4x (scaling min_count with it) and report
//! how each stage's time grows.
//!
//!     cargo run --release --example scaling_bench

use wordgraph::embed::TrainConfig;
use wordgraph::pipeline::{scaling_bench, CorpusConfig, PipelineConfig};
use wordgraph::walk::WalkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("wordgraph-example-scaling");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("corpus.txt");
    let sentences = [
        "rivers flow into the sea and the sea feeds the clouds",
        "clouds bring rain to the hills and the hills feed the rivers",
        "farmers watch the clouds and pray for rain on the hills",
    ];
    std::fs::write(&input, sentences.join(" . ").repeat(2000))?;

    let config = PipelineConfig {
        seed: Some(7),
        output_dir: dir.join("bench"),
        corpus: CorpusConfig {
            inputs: vec![input],
            min_count: 2,
            ..Default::default()
        },
        walk: WalkConfig {
            walk_length: 40,
            walks_per_node: Some(20),
            ..Default::default()
        },
        train: TrainConfig {
            dimension: 32,
            epochs: 2,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = scaling_bench(&config, &[1, 2, 4])?;
    print!("{}", report.format_table());
    Ok(())
}
