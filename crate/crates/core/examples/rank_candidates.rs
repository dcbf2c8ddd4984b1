//! Rank candidate targets by cosine similarity and compute MRR and Hits@K.
//! The vectors are written by hand so the ranks can be checked by eye.
//!
//! ```text
//! cargo run --example rank_candidates
//! ```

use alignwalk::ntriples::Iri;
use alignwalk::projection::LexicalTable;
use alignwalk::ranking::{evaluate, CandidatePool, EntityScorer};
use alignwalk::sgns::WordVectors;

const VECTORS: &str = "\
6 3
http://example.org/helis#Fructose 1 0.2 0
http://purl.obolibrary.org/obo/FOODON_03301305 0.9 0.3 0.1
http://purl.obolibrary.org/obo/FOODON_03420108 0.5 0.8 0
http://example.org/helis#Sugars 0.4 0.9 0.1
glucose 0 0.3 1
fungus -1 0 0.2
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let vectors = WordVectors::read_text(VECTORS.as_bytes())?;
    let iri = |s: &str| Iri::new(s);
    let mut lex = LexicalTable::new();
    // no vector of its own: scored through its label words
    lex.add(iri("http://purl.obolibrary.org/obo/CHEBI_17234")?, "glucose");
    lex.add(iri("http://purl.obolibrary.org/obo/FOODON_03411261")?, "fungus");

    let candidates = |names: &[&str]| names.iter().map(|s| iri(s)).collect::<Result<Vec<_>, _>>();
    let pools = vec![
        CandidatePool::new(
            iri("http://example.org/helis#Fructose")?,
            iri("http://purl.obolibrary.org/obo/FOODON_03301305")?,
            candidates(&[
                "http://purl.obolibrary.org/obo/FOODON_03420108",
                "http://purl.obolibrary.org/obo/FOODON_03301305",
                "http://purl.obolibrary.org/obo/CHEBI_17234",
                "http://purl.obolibrary.org/obo/FOODON_03411261",
            ])?,
        )?,
        CandidatePool::new(
            iri("http://example.org/helis#Sugars")?,
            iri("http://purl.obolibrary.org/obo/CHEBI_17234")?,
            candidates(&[
                "http://purl.obolibrary.org/obo/FOODON_03420108",
                "http://purl.obolibrary.org/obo/FOODON_03301305",
                "http://purl.obolibrary.org/obo/CHEBI_17234",
                "http://example.org/unknown#Thing",
            ])?,
        )?,
    ];

    let scorer = EntityScorer::new(&vectors, &lex);
    for pool in &pools {
        println!("{}:", pool.source.local_name());
        for (rank, (c, s)) in scorer.rank_pool(pool).iter().enumerate() {
            let mark = if *c == pool.true_target { "*" } else { " " };
            println!("  {}{mark} {s:+.4}  {}", rank + 1, c.local_name());
        }
    }
    println!("{}", evaluate(&pools, &vectors, &lex)?);
    Ok(())
}
