//! Run the three intrinsic evaluations on a hand-made embedding.
//!
//!     cargo run --example evaluate

use wordgraph::embed::EmbeddingMatrix;
use wordgraph::eval::{
    eval_analogy, eval_categorization, eval_similarity, format_table, AnalogyDataset, CategorizationDataset,
    SimilarityDataset,
};

fn main() -> wordgraph::Result<()> {
    // axes: royalty, gender, animal
    let rows: [(&str, [f32; 3]); 8] = [
        ("king", [1.0, 1.0, 0.0]),
        ("queen", [1.0, -1.0, 0.0]),
        ("man", [0.0, 1.0, 0.1]),
        ("woman", [0.0, -1.0, 0.1]),
        ("prince", [0.8, 0.9, 0.0]),
        ("cat", [0.0, 0.1, 1.0]),
        ("dog", [0.1, 0.2, 1.0]),
        ("horse", [0.2, 0.0, 0.9]),
    ];
    let emb = EmbeddingMatrix::from_parts(
        rows.iter().map(|r| r.0.to_string()).collect(),
        3,
        rows.iter().flat_map(|r| r.1).collect(),
    )?;
    let s = |x: &str| x.to_string();

    let sim = SimilarityDataset {
        pairs: vec![
            (s("king"), s("prince"), 9.0),
            (s("cat"), s("dog"), 8.5),
            (s("king"), s("queen"), 6.0),
            (s("man"), s("horse"), 2.0),
            (s("queen"), s("cat"), 1.0),
            (s("king"), s("unicorn"), 5.0),
        ],
    };
    let ana = AnalogyDataset {
        quads: vec![
            ["man", "king", "woman", "queen"].map(s),
            ["king", "queen", "man", "woman"].map(s),
        ],
    };
    let cat = CategorizationDataset::new(
        [
            ("king", "royal"),
            ("queen", "royal"),
            ("prince", "royal"),
            ("cat", "animal"),
            ("dog", "animal"),
            ("horse", "animal"),
        ]
        .iter()
        .map(|&(w, c)| (s(w), s(c)))
        .collect(),
    )?;

    let reports = vec![
        eval_similarity(&emb, &sim)?.with_dataset("toy-sim"),
        eval_analogy(&emb, &ana)?.with_dataset("toy-analogy"),
        eval_categorization(&emb, &cat)?.with_dataset("toy-cat"),
    ];
    print!("{}", format_table(&reports));
    for r in &reports {
        println!("{}", r.to_json_line());
    }
    Ok(())
}
