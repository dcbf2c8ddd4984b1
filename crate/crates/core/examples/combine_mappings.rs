//! Union and intersection of two mapping sets, e.g. a high-precision and a
//! high-recall output of two matchers, and the seed entities they yield.
//!
//! ```text
//! cargo run --example combine_mappings
//! ```

use alignwalk::alignment::{
    intersection, intersection_with, read_mappings, seed_entities, union, ConfidenceRule, Relation,
};

const PRECISE: &str = "SrcEntity\tTgtEntity\tScore\n\
http://example.org/helis#Fructose\thttp://purl.obolibrary.org/obo/FOODON_03301305\t0.9\n\
http://example.org/helis#Sugars\thttp://purl.obolibrary.org/obo/FOODON_03420108\t0.8\n";

const BROAD: &str = "SrcEntity\tTgtEntity\tScore\tRelation\n\
http://example.org/helis#Fructose\thttp://purl.obolibrary.org/obo/FOODON_03301305\t0.7\t=\n\
http://example.org/helis#Fructose\thttp://purl.obolibrary.org/obo/CHEBI_28757\t0.6\t=\n\
http://example.org/helis#Glucose\thttp://purl.obolibrary.org/obo/FOODON_03420108\t0.5\t<\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = read_mappings(PRECISE.as_bytes(), Relation::Equivalence)?;
    let b = read_mappings(BROAD.as_bytes(), Relation::Equivalence)?;

    let show = |title: &str, set: &alignwalk::alignment::MappingSet| {
        println!("{title} ({} mappings)", set.len());
        for m in set.iter() {
            println!(
                "  {} {} {}  c={}",
                m.source.local_name(),
                m.relation.symbol(),
                m.target.local_name(),
                m.confidence
            );
        }
    };
    show("union, max confidence", &union(&a, &b));
    show("intersection, mean confidence", &intersection(&a, &b));
    show(
        "intersection, min confidence",
        &intersection_with(&a, &b, ConfidenceRule::Min),
    );

    let seeds: Vec<String> = seed_entities(&union(&a, &b))
        .iter()
        .map(|i| i.local_name().to_owned())
        .collect();
    println!("walk seeds: {seeds:?}");
    Ok(())
}
