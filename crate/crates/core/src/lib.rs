//! Ontology embeddings tailored to alignment.
//!
//! Ontologies are projected to labelled graphs, merged through weighted
//! mappings, and walked with transition probabilities proportional to edge
//! weight. The walks become a text corpus for a skip-gram model whose
//! vectors rank candidate targets for each source entity.

pub mod alignment;
pub mod corpus;
pub mod graph;
pub mod ntriples;
pub mod pipeline;
pub mod projection;
pub mod ranking;
pub mod rng;
pub mod sgns;
pub mod synthetic;
mod tsv;
pub mod vocab;
pub mod walker;

pub use tsv::TsvError;
