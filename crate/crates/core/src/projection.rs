//! Ontology projection: OWL axioms (as triples) to a labeled edge list plus a
//! table of lexical annotations.
//!
//! Rules applied, with `A`, `B`, `D`, `R`, `P` named IRIs:
//!
//! * subclass: `A rdfs:subClassOf B` gives `(A, rdfs:subClassOf, B)`.
//! * equivalence: `A owl:equivalentClass B` gives the edge in both directions.
//! * existential restriction: `A rdfs:subClassOf _:r` (or `owl:equivalentClass`)
//!   with `_:r` an `owl:Restriction` on `R` with `owl:someValuesFrom D` gives
//!   `(A, R, D)`.
//! * assertion: `a P b` for any predicate outside the rdf/rdfs/owl namespaces
//!   that is not declared an annotation or datatype property.
//! * inverse subclass (optional): every subclass edge `(A, _, B)` also gives
//!   `(B, urn:owl2vec4oa:inverseSubClassOf, A)`.
//!
//! Restriction bodies are decoded one level deep; anything else hanging off a
//! blank node is counted as skipped.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use indexmap::{IndexMap, IndexSet};

use crate::ntriples::{BlankNode, Iri, Term, Triple};
use crate::tsv;
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedEdge {
    pub source: Iri,
    pub label: Iri,
    pub target: Iri,
    pub weight: f64,
}

impl ProjectedEdge {
    pub fn axiom(source: &Iri, label: &Iri, target: &Iri) -> Self {
        ProjectedEdge {
            source: source.clone(),
            label: label.clone(),
            target: target.clone(),
            weight: 1.0,
        }
    }
}

/// Entity IRI to its label strings; the first label is the primary one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexicalTable {
    entries: IndexMap<Iri, Vec<String>>,
}

impl LexicalTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a label unless the entity already carries it.
    pub fn add(&mut self, iri: Iri, label: impl Into<String>) {
        let label = label.into();
        let labels = self.entries.entry(iri).or_default();
        if !labels.contains(&label) {
            labels.push(label);
        }
    }

    pub fn labels(&self, iri: &str) -> Option<&[String]> {
        self.entries.get(iri).map(Vec::as_slice)
    }

    pub fn primary_label(&self, iri: &str) -> Option<&str> {
        self.labels(iri).and_then(|l| l.first()).map(String::as_str)
    }

    pub fn contains(&self, iri: &str) -> bool {
        self.entries.contains_key(iri)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Iri, &[String])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Merges `other` in, keeping existing labels first.
    pub fn extend(&mut self, other: &LexicalTable) {
        for (iri, labels) in other.iter() {
            for l in labels {
                self.add(iri.clone(), l.clone());
            }
        }
    }

    /// `iri \t label` rows, one per label, primary label first.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (iri, labels) in self.iter() {
            for l in labels {
                writeln!(out, "{}\t{}", iri, tsv::escape(l))?;
            }
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self, tsv::TsvError> {
        let mut table = LexicalTable::new();
        for (row, line) in tsv::rows(input) {
            let line = line?;
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(tsv::TsvError::Malformed {
                    row,
                    reason: format!("expected 2 columns, found {}", fields.len()),
                });
            }
            let iri = tsv::parse_iri(fields[0], row)?;
            table.add(iri, tsv::unescape(fields[1]));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionConfig {
    /// Literal-valued predicates that feed the lexical table, in priority
    /// order: labels from earlier properties come first.
    pub annotation_props: Vec<Iri>,
    pub inverse_subclass: bool,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            annotation_props: vec![Iri::new(vocab::RDFS_LABEL).expect("static IRI")],
            inverse_subclass: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionReport {
    pub subclass_edges: usize,
    pub equivalence_edges: usize,
    pub existential_edges: usize,
    pub assertion_edges: usize,
    pub inverse_subclass_edges: usize,
    pub skipped_axioms: usize,
    pub labeled_entities: usize,
    pub unlabeled_entities: usize,
}

impl ProjectionReport {
    pub fn total_edges(&self) -> usize {
        self.subclass_edges
            + self.equivalence_edges
            + self.existential_edges
            + self.assertion_edges
            + self.inverse_subclass_edges
    }
}

impl fmt::Display for ProjectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "edges.subclass = {}", self.subclass_edges)?;
        writeln!(f, "edges.equivalence = {}", self.equivalence_edges)?;
        writeln!(f, "edges.existential = {}", self.existential_edges)?;
        writeln!(f, "edges.assertion = {}", self.assertion_edges)?;
        writeln!(f, "edges.inverse_subclass = {}", self.inverse_subclass_edges)?;
        writeln!(f, "edges.total = {}", self.total_edges())?;
        writeln!(f, "skipped_axioms = {}", self.skipped_axioms)?;
        writeln!(f, "entities.labeled = {}", self.labeled_entities)?;
        writeln!(f, "entities.unlabeled = {}", self.unlabeled_entities)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Projection {
    pub edges: Vec<ProjectedEdge>,
    pub lexical: LexicalTable,
    pub report: ProjectionReport,
}

#[derive(Clone, Copy)]
enum Rule {
    Subclass,
    Equivalence,
    Existential,
    Assertion,
    InverseSubclass,
}

struct Emitter {
    seen: HashSet<(Iri, Iri, Iri)>,
    edges: Vec<ProjectedEdge>,
    report: ProjectionReport,
}

impl Emitter {
    fn emit(&mut self, rule: Rule, s: &Iri, l: &Iri, t: &Iri) {
        if !self.seen.insert((s.clone(), l.clone(), t.clone())) {
            return;
        }
        self.edges.push(ProjectedEdge::axiom(s, l, t));
        let counter = match rule {
            Rule::Subclass => &mut self.report.subclass_edges,
            Rule::Equivalence => &mut self.report.equivalence_edges,
            Rule::Existential => &mut self.report.existential_edges,
            Rule::Assertion => &mut self.report.assertion_edges,
            Rule::InverseSubclass => &mut self.report.inverse_subclass_edges,
        };
        *counter += 1;
    }
}

pub fn project(triples: &[Triple], cfg: &ProjectionConfig) -> Projection {
    let iri = |s: &str| Iri::new(s).expect("static IRI");
    let subclass_of = iri(vocab::RDFS_SUBCLASS_OF);
    let equivalent = iri(vocab::OWL_EQUIVALENT_CLASS);
    let inverse = iri(vocab::INVERSE_SUBCLASS_OF);

    // blank-node bodies and predicates excluded from assertion edges
    let mut bodies: HashMap<&BlankNode, Vec<(&Iri, &Term)>> = HashMap::new();
    let mut non_object_props: HashSet<&str> = HashSet::new();
    let mut declared_classes: Vec<&Iri> = Vec::new();
    for t in triples {
        match &t.subject {
            Term::Blank(b) => bodies.entry(b).or_default().push((&t.predicate, &t.object)),
            Term::Iri(s) if t.predicate.as_str() == vocab::RDF_TYPE => match t.object.as_iri() {
                Some(o)
                    if o.as_str() == vocab::OWL_ANNOTATION_PROPERTY || o.as_str() == vocab::OWL_DATATYPE_PROPERTY =>
                {
                    non_object_props.insert(s.as_str());
                }
                Some(o) if o.as_str() == vocab::OWL_CLASS => declared_classes.push(s),
                _ => {}
            },
            _ => {}
        }
    }
    for p in &cfg.annotation_props {
        non_object_props.insert(p.as_str());
    }

    let mut em = Emitter {
        seen: HashSet::new(),
        edges: Vec::new(),
        report: ProjectionReport::default(),
    };
    // (property priority, first-seen position, entity, label)
    let mut annotations: Vec<(usize, usize, &Iri, &str)> = Vec::new();

    for (pos, t) in triples.iter().enumerate() {
        let Term::Iri(s) = &t.subject else { continue };
        let p = &t.predicate;

        if let Some(lit) = t.object.as_literal() {
            if let Some(rank) = cfg.annotation_props.iter().position(|a| a == p) {
                annotations.push((rank, pos, s, &lit.lexical));
            }
            continue;
        }

        if p == &subclass_of || p == &equivalent {
            match &t.object {
                Term::Iri(o) if p == &subclass_of => {
                    em.emit(Rule::Subclass, s, p, o);
                    if cfg.inverse_subclass {
                        em.emit(Rule::InverseSubclass, o, &inverse, s);
                    }
                }
                Term::Iri(o) => {
                    em.emit(Rule::Equivalence, s, p, o);
                    em.emit(Rule::Equivalence, o, p, s);
                }
                Term::Blank(b) => match decode_existential(bodies.get(b)) {
                    Some((r, d)) => em.emit(Rule::Existential, s, r, d),
                    None => em.report.skipped_axioms += 1,
                },
                Term::Literal(_) => unreachable!("handled above"),
            }
            continue;
        }

        if vocab::is_reserved(p.as_str()) || non_object_props.contains(p.as_str()) {
            continue;
        }
        match &t.object {
            Term::Iri(o) => em.emit(Rule::Assertion, s, p, o),
            _ => em.report.skipped_axioms += 1,
        }
    }

    annotations.sort_by_key(|&(rank, pos, _, _)| (rank, pos));
    let mut lexical = LexicalTable::new();
    // keep entity order by first appearance in the document
    let mut by_pos = annotations.clone();
    by_pos.sort_by_key(|&(_, pos, _, _)| pos);
    for &(_, _, s, _) in &by_pos {
        lexical.entries.entry(s.clone()).or_default();
    }
    for (_, _, s, label) in annotations {
        lexical.add(s.clone(), label);
    }

    let mut entities: IndexSet<&Iri> = IndexSet::new();
    for e in &em.edges {
        entities.insert(&e.source);
        entities.insert(&e.target);
    }
    entities.extend(declared_classes);
    entities.extend(lexical.entries.keys());
    let labeled = entities.iter().filter(|e| lexical.contains(e.as_str())).count();
    em.report.labeled_entities = labeled;
    em.report.unlabeled_entities = entities.len() - labeled;

    Projection {
        edges: em.edges,
        lexical,
        report: em.report,
    }
}

fn decode_existential<'a>(body: Option<&Vec<(&'a Iri, &'a Term)>>) -> Option<(&'a Iri, &'a Iri)> {
    let body = body?;
    let mut is_restriction = false;
    let mut on_property = None;
    let mut filler = None;
    for &(p, o) in body {
        match p.as_str() {
            vocab::RDF_TYPE => {
                if o.as_iri().is_some_and(|o| o.as_str() == vocab::OWL_RESTRICTION) {
                    is_restriction = true;
                }
            }
            vocab::OWL_ON_PROPERTY => {
                if on_property.replace(o.as_iri()?).is_some() {
                    return None;
                }
            }
            vocab::OWL_SOME_VALUES_FROM => {
                // nested class expressions are not decoded
                if filler.replace(o.as_iri()?).is_some() {
                    return None;
                }
            }
            // cardinalities, allValuesFrom, hasValue, ...
            _ => return None,
        }
    }
    if is_restriction {
        Some((on_property?, filler?))
    } else {
        None
    }
}

/// `source \t label \t target \t weight` rows.
pub fn write_edges_tsv<W: Write>(edges: &[ProjectedEdge], mut out: W) -> std::io::Result<()> {
    for e in edges {
        writeln!(out, "{}\t{}\t{}\t{:?}", e.source, e.label, e.target, e.weight)?;
    }
    Ok(())
}

pub fn read_edges_tsv<R: BufRead>(input: R) -> Result<Vec<ProjectedEdge>, tsv::TsvError> {
    let mut edges = Vec::new();
    for (row, line) in tsv::rows(input) {
        let line = line?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(tsv::TsvError::Malformed {
                row,
                reason: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        let weight: f64 = fields[3].parse().map_err(|_| tsv::TsvError::Malformed {
            row,
            reason: format!("bad weight {:?}", fields[3]),
        })?;
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(tsv::TsvError::Malformed {
                row,
                reason: format!("weight {weight} outside (0, 1]"),
            });
        }
        edges.push(ProjectedEdge {
            source: tsv::parse_iri(fields[0], row)?,
            label: tsv::parse_iri(fields[1], row)?,
            target: tsv::parse_iri(fields[2], row)?,
            weight,
        });
    }
    Ok(edges)
}
