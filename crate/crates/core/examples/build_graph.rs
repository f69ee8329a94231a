//! Build the co-occurrence graph for a single sentence and print its edges
//! and node weights.
//!
//!     cargo run --example build_graph

use wordgraph::corpus::{build_vocabulary, tokenize_str, TokenizerConfig};
use wordgraph::graph::{build_graph, compute_tf_node_weights};

const SENTENCE: &str = "In truth, whatever is worth doing at all, is worth doing well; \
    and nothing can be done well without attention.";

fn main() -> wordgraph::Result<()> {
    let tokens = tokenize_str(SENTENCE, TokenizerConfig::default());
    let vocab = build_vocabulary(&tokens, 1, None)?;
    let mut graph = build_graph(&tokens, vocab)?;
    let pw = compute_tf_node_weights(graph.vocab())?;
    graph.set_node_weights(pw)?;

    let stats = graph.stats();
    println!(
        "{} tokens, {} nodes, {} edges, density {:.3}",
        tokens.len(),
        stats.node_count,
        stats.edge_count,
        stats.density
    );
    for (u, x, w) in graph.edges() {
        println!("{:>10} -> {:<10} {w}", graph.vocab().word(u), graph.vocab().word(x));
    }
    let pw = graph.node_weights().unwrap();
    for id in 0..graph.node_count() as u32 {
        println!("PW[{}] = {:.3}", graph.vocab().word(id), pw[id as usize]);
    }
    Ok(())
}
