//! Turn walks into the structure, lexical and combined documents.
//!
//! ```text
//! cargo run --example build_corpus [REPLACE_PROB]
//! ```

use alignwalk::corpus::{build_documents, tokenize_label, CorpusConfig, TokenizerConfig};
use alignwalk::ntriples::Iri;
use alignwalk::projection::LexicalTable;
use alignwalk::walker::Walk;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let replace_prob = match std::env::args().nth(1) {
        Some(p) => p.parse()?,
        None => 0.5,
    };
    let tok = TokenizerConfig::default();
    for label in ["mushroom (canned)", "VitaminB12", "hasExactSynonym"] {
        println!("{label:?} -> {:?}", tokenize_label(label, &tok));
    }

    let iri = |s: &str| Iri::new(s);
    let mut lex = LexicalTable::new();
    lex.add(iri("http://example.org/helis#Fructose")?, "Fructose");
    lex.add(iri("http://purl.obolibrary.org/obo/FOODON_03301305")?, "fructose");
    lex.add(iri("http://purl.obolibrary.org/obo/FOODON_03420108")?, "sugar");
    let walk = Walk {
        tokens: [
            "http://example.org/helis#Fructose",
            "http://www.w3.org/2002/07/owl#equivalentClass",
            "http://purl.obolibrary.org/obo/FOODON_03301305",
            "http://www.w3.org/2000/01/rdf-schema#subClassOf",
            "http://purl.obolibrary.org/obo/FOODON_03420108",
        ]
        .iter()
        .map(|s| iri(s))
        .collect::<Result<_, _>>()?,
    };
    let walks = vec![walk; 3];
    let docs = build_documents(
        &walks,
        &lex,
        &CorpusConfig {
            replace_prob,
            ..Default::default()
        },
    );
    println!("structure: {}", docs.structure[0].join(" "));
    println!("lexical:   {}", docs.lexical[0].join(" "));
    for (i, s) in docs.combined.iter().enumerate() {
        println!("combined {i}: {}", s.join(" "));
    }
    Ok(())
}
