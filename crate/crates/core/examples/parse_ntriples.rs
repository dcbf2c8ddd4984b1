//! Parse an N-Triples file, then show strict and lenient handling of a
//! malformed line.
//!
//! ```text
//! cargo run --example parse_ntriples [FILE.nt]
//! ```

use alignwalk::ntriples::{parse_document, to_ntriples_line, ParseOptions, Term};

const FRAGMENT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/foodon_fragment.nt");

fn describe(term: &Term) -> String {
    match term {
        Term::Iri(i) => i.local_name().to_owned(),
        Term::Blank(b) => format!("_:{}", b.label()),
        Term::Literal(l) => format!("{:?}", l.lexical),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| FRAGMENT.to_owned());
    let text = std::fs::read_to_string(&path)?;
    let doc = parse_document(&text, ParseOptions::default())?;
    println!("{}: {} triples", path, doc.triples.len());
    for t in doc.triples.iter().take(6) {
        println!(
            "  {} --{}--> {}",
            describe(&t.subject),
            t.predicate.local_name(),
            describe(&t.object)
        );
    }
    println!(
        "round trip of the first triple:\n  {}",
        to_ntriples_line(&doc.triples[0])
    );

    let broken = format!("{text}<http://example.org/a> <http://example.org/p> \"unterminated .\n");
    match parse_document(&broken, ParseOptions::default()) {
        Ok(_) => println!("unexpectedly parsed"),
        Err(e) => println!("strict mode: {e}"),
    }
    let lenient = parse_document(&broken, ParseOptions { lenient: true })?;
    println!(
        "lenient mode: {} triples, skipped lines {:?}",
        lenient.triples.len(),
        lenient.skipped.iter().map(|(line, _)| line).collect::<Vec<_>>()
    );
    Ok(())
}
