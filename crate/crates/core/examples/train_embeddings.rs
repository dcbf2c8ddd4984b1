//! Train skip-gram embeddings on the fragment corpus and list the nearest
//! neighbours of a few tokens.
//!
//! ```text
//! cargo run --release --example train_embeddings
//! ```

use alignwalk::alignment::{load_mappings, Relation};
use alignwalk::corpus::{build_documents, CorpusConfig};
use alignwalk::graph::merge;
use alignwalk::ntriples::{parse_document, ParseOptions};
use alignwalk::projection::{project, LexicalTable, ProjectionConfig};
use alignwalk::ranking::cosine;
use alignwalk::sgns::{train, TrainConfig};
use alignwalk::walker::{generate_walks, WalkConfig};

fn data(name: &str) -> String {
    format!("{}/examples/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut edge_lists = Vec::new();
    let mut lex = LexicalTable::new();
    for file in ["helis_fragment.nt", "foodon_fragment.nt"] {
        let doc = parse_document(&std::fs::read_to_string(data(file))?, ParseOptions::default())?;
        let p = project(&doc.triples, &ProjectionConfig::default());
        edge_lists.push(p.edges);
        lex.extend(&p.lexical);
    }
    let mappings = load_mappings(data("fragment_mappings.tsv").as_ref(), Relation::Equivalence)?;
    let g = merge(&edge_lists, &mappings);
    let walks = generate_walks(
        &g,
        g.vertices(),
        &WalkConfig {
            walk_depth: 4,
            iterations: 30,
            rng_seed: 1,
        },
    )?
    .walks;
    let docs = build_documents(&walks, &lex, &CorpusConfig::default());
    let corpus: Vec<_> = docs.merged().cloned().collect();

    let cfg = TrainConfig {
        dim: 32,
        epochs: 30,
        ..Default::default()
    };
    let trained = train(&corpus, &cfg)?;
    let losses = &trained.report.epoch_losses;
    println!(
        "{} sentences, {} tokens in vocabulary, loss {:.3} -> {:.3}",
        corpus.len(),
        trained.table.vocab.len(),
        losses[0],
        losses[losses.len() - 1]
    );

    let vectors = trained.table.word_vectors();
    let as_f64 = |t: &str| vectors.get(t).map(|v| v.iter().map(|&x| x as f64).collect::<Vec<_>>());
    for query in ["http://example.org/helis#Fructose", "sugar"] {
        let q = as_f64(query).expect("in vocabulary");
        let mut near: Vec<(f64, &str)> = vectors
            .tokens()
            .iter()
            .filter(|t| t.as_str() != query)
            .filter_map(|t| Some((cosine(&q, &as_f64(t)?)?, t.as_str())))
            .collect();
        near.sort_by(|a, b| b.0.total_cmp(&a.0));
        println!("nearest to {query}:");
        for (s, t) in near.iter().take(4) {
            println!("  {s:+.3}  {t}");
        }
    }
    Ok(())
}
