//! Compare the next-step law for a few (p, q) settings, then sample walks.
//!
//!     cargo run --example biased_walks

use wordgraph::corpus::{build_vocabulary, tokenize_str, TokenizerConfig};
use wordgraph::graph::{build_graph, compute_tf_node_weights};
use wordgraph::walk::{generate_corpus, transition_distribution, WalkConfig};

const TEXT: &str = "the cat sat on the mat . the mat was near the cat . \
    the cat chased a dog . a dog sat on the mat . the cat slept .";

fn main() -> wordgraph::Result<()> {
    let tokens = tokenize_str(TEXT, TokenizerConfig::default());
    let mut graph = build_graph(&tokens, build_vocabulary(&tokens, 1, None)?)?;
    graph.set_node_weights(compute_tf_node_weights(graph.vocab())?)?;
    let v = graph.vocab();
    let (prev, curr) = (v.id("the").unwrap(), v.id("cat").unwrap());

    for (p, q) in [(1.0, 1.0), (1.0, 0.001), (0.25, 1.0)] {
        println!("the -> cat -> ?   p={p} q={q}");
        let Some(dist) = transition_distribution(&graph, prev, curr, p, q) else {
            continue;
        };
        for (x, pr) in dist {
            println!("    {:<6} {pr:.4}", v.word(x));
        }
    }

    let config = WalkConfig {
        walk_length: 8,
        total_walks: Some(10),
        seed: 3,
        ..Default::default()
    };
    let walks = generate_corpus(&graph, &config)?;
    println!("{} walks, {} tokens", walks.len(), walks.token_count());
    for walk in walks.iter().take(5) {
        let words: Vec<&str> = walk.iter().map(|&id| v.word(id)).collect();
        println!("    {}", words.join(" "));
    }
    Ok(())
}
