//! Project an ontology into labelled edges and a lexical table, with and
//! without the inverse-subclass edges.
//!
//! ```text
//! cargo run --example project_ontology [FILE.nt]
//! ```

use alignwalk::ntriples::{parse_document, ParseOptions};
use alignwalk::projection::{project, ProjectionConfig};

const FRAGMENT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/foodon_fragment.nt");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| FRAGMENT.to_owned());
    let doc = parse_document(&std::fs::read_to_string(&path)?, ParseOptions::default())?;

    let p = project(&doc.triples, &ProjectionConfig::default());
    println!("edges:");
    for e in &p.edges {
        println!(
            "  {} --{}--> {}",
            e.source.local_name(),
            e.label.local_name(),
            e.target.local_name()
        );
    }
    println!("labels:");
    for (iri, labels) in p.lexical.iter() {
        println!("  {} = {:?}", iri.local_name(), labels);
    }
    println!("report:\n{}", p.report);

    let plain = project(
        &doc.triples,
        &ProjectionConfig {
            inverse_subclass: false,
            ..Default::default()
        },
    );
    println!("without inverse subclass edges: {} edges", plain.edges.len());
    Ok(())
}
