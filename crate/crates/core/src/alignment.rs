//! Seed mappings: loading, combining and extracting the seed entities that
//! the walker starts from.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::ntriples::Iri;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Equivalence,
    /// Source is subsumed by target.
    Subsumption,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equivalence => "=",
            Relation::Subsumption => "<",
        }
    }
}

impl FromStr for Relation {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "=" => Ok(Relation::Equivalence),
            "<" => Ok(Relation::Subsumption),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    pub source: Iri,
    pub target: Iri,
    pub relation: Relation,
    /// In (0, 1].
    pub confidence: f64,
}

impl Mapping {
    pub fn new(source: Iri, target: Iri, relation: Relation, confidence: f64) -> Result<Self, MappingError> {
        if source == target {
            return Err(MappingError::SelfMapping { row: 0 });
        }
        let confidence = check_confidence(confidence).ok_or(MappingError::BadConfidence { row: 0 })?;
        Ok(Mapping {
            source,
            target,
            relation,
            confidence,
        })
    }

    pub fn key(&self) -> (Iri, Iri, Relation) {
        (self.source.clone(), self.target.clone(), self.relation)
    }
}

/// Values in (1, 1 + 1e-9] are float noise and clamp to 1.
fn check_confidence(c: f64) -> Option<f64> {
    if c > 0.0 && c <= 1.0 {
        Some(c)
    } else if c > 1.0 && c <= 1.0 + 1e-9 {
        Some(1.0)
    } else {
        None
    }
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("row {row}: confidence must lie in (0, 1]")]
    BadConfidence { row: usize },
    #[error("row {row}: bad IRI: {reason}")]
    BadIri { row: usize, reason: String },
    #[error("row {row}: source and target are the same entity")]
    SelfMapping { row: usize },
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How a combinator resolves the confidence of a key present in both inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfidenceRule {
    Max,
    Min,
    Mean,
}

impl ConfidenceRule {
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            ConfidenceRule::Max => a.max(b),
            ConfidenceRule::Min => a.min(b),
            ConfidenceRule::Mean => (a + b) / 2.0,
        }
    }
}

impl FromStr for ConfidenceRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "max" => Ok(ConfidenceRule::Max),
            "min" => Ok(ConfidenceRule::Min),
            "mean" => Ok(ConfidenceRule::Mean),
            other => Err(format!("unknown confidence rule {other:?} (max|min|mean)")),
        }
    }
}

impl fmt::Display for ConfidenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfidenceRule::Max => "max",
            ConfidenceRule::Min => "min",
            ConfidenceRule::Mean => "mean",
        })
    }
}

type Key = (Iri, Iri, Relation);

/// Insertion-ordered mappings, unique on `(source, target, relation)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappingSet {
    entries: IndexMap<Key, f64>,
}

impl MappingSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a mapping; a repeated key keeps the higher confidence.
    pub fn insert(&mut self, m: Mapping) {
        self.insert_with(m, ConfidenceRule::Max);
    }

    fn insert_with(&mut self, m: Mapping, rule: ConfidenceRule) {
        let key = (m.source, m.target, m.relation);
        self.entries
            .entry(key)
            .and_modify(|c| *c = rule.apply(*c, m.confidence))
            .or_insert(m.confidence);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Mapping> + '_ {
        self.entries.iter().map(|((s, t, r), &c)| Mapping {
            source: s.clone(),
            target: t.clone(),
            relation: *r,
            confidence: c,
        })
    }

    pub fn get(&self, source: &Iri, target: &Iri, relation: Relation) -> Option<f64> {
        self.entries.get(&(source.clone(), target.clone(), relation)).copied()
    }

    pub fn to_vec(&self) -> Vec<Mapping> {
        self.iter().collect()
    }

    /// Confidence by key, for order-insensitive comparison.
    pub fn as_map(&self) -> HashMap<Key, f64> {
        self.entries.iter().map(|(k, &c)| (k.clone(), c)).collect()
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "SrcEntity\tTgtEntity\tScore\tRelation")?;
        for m in self.iter() {
            writeln!(
                out,
                "{}\t{}\t{:?}\t{}",
                m.source,
                m.target,
                m.confidence,
                m.relation.symbol()
            )?;
        }
        Ok(())
    }
}

impl FromIterator<Mapping> for MappingSet {
    fn from_iter<T: IntoIterator<Item = Mapping>>(iter: T) -> Self {
        let mut set = MappingSet::new();
        for m in iter {
            set.insert(m);
        }
        set
    }
}

/// Reads a `SrcEntity \t TgtEntity [\t Score [\t Relation]]` file. A first
/// row whose first field is `SrcEntity` is treated as a header.
pub fn read_mappings<R: BufRead>(input: R, default_relation: Relation) -> Result<MappingSet, MappingError> {
    let mut set = MappingSet::new();
    for (i, line) in input.lines().enumerate() {
        let row = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if row == 1 && fields[0] == "SrcEntity" {
            continue;
        }
        if !(2..=4).contains(&fields.len()) {
            return Err(MappingError::MalformedRow {
                row,
                reason: format!("expected 2 to 4 columns, found {}", fields.len()),
            });
        }
        let iri = |s: &str| {
            Iri::new(s).map_err(|e| MappingError::BadIri {
                row,
                reason: e.to_string(),
            })
        };
        let source = iri(fields[0])?;
        let target = iri(fields[1])?;
        let confidence = match fields.get(2) {
            None => 1.0,
            Some(s) => {
                let c: f64 = s.parse().map_err(|_| MappingError::BadConfidence { row })?;
                check_confidence(c).ok_or(MappingError::BadConfidence { row })?
            }
        };
        let relation = match fields.get(3) {
            None | Some(&"") => default_relation,
            Some(s) => s.parse().map_err(|_| MappingError::MalformedRow {
                row,
                reason: format!("unknown relation {s:?} (expected = or <)"),
            })?,
        };
        if source == target {
            return Err(MappingError::SelfMapping { row });
        }
        set.insert(Mapping {
            source,
            target,
            relation,
            confidence,
        });
    }
    Ok(set)
}

pub fn load_mappings(path: &std::path::Path, default_relation: Relation) -> Result<MappingSet, MappingError> {
    let file = std::fs::File::open(path)?;
    read_mappings(std::io::BufReader::new(file), default_relation)
}

/// Key-wise union; colliding keys resolve by `rule` (max by default).
pub fn union_with(a: &MappingSet, b: &MappingSet, rule: ConfidenceRule) -> MappingSet {
    let mut out = a.clone();
    for m in b.iter() {
        out.insert_with(m, rule);
    }
    out
}

pub fn union(a: &MappingSet, b: &MappingSet) -> MappingSet {
    union_with(a, b, ConfidenceRule::Max)
}

/// Keys present in both, in `a`'s order; confidences blended by `rule`.
pub fn intersection_with(a: &MappingSet, b: &MappingSet, rule: ConfidenceRule) -> MappingSet {
    let entries = a
        .entries
        .iter()
        .filter_map(|(k, &ca)| b.entries.get(k).map(|&cb| (k.clone(), rule.apply(ca, cb))))
        .collect();
    MappingSet { entries }
}

pub fn intersection(a: &MappingSet, b: &MappingSet) -> MappingSet {
    intersection_with(a, b, ConfidenceRule::Mean)
}

/// Every source and target IRI, deduplicated in first-occurrence order.
pub fn seed_entities(m: &MappingSet) -> Vec<Iri> {
    let mut seen = IndexSet::new();
    for (s, t, _) in m.entries.keys() {
        seen.insert(s.clone());
        seen.insert(t.clone());
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn m(s: &str, t: &str, c: f64) -> Mapping {
        Mapping::new(iri(s), iri(t), Relation::Equivalence, c).unwrap()
    }

    fn set(ms: &[Mapping]) -> MappingSet {
        ms.iter().cloned().collect()
    }

    #[test]
    fn load_row_with_score() {
        let text = "HeLiS:Fructose\tobo:FOODON_03301305\t0.9\n";
        let s = read_mappings(text.as_bytes(), Relation::Equivalence).unwrap();
        assert_eq!(s.to_vec(), vec![m("HeLiS:Fructose", "obo:FOODON_03301305", 0.9)]);
    }

    #[test]
    fn load_header_defaults_and_relations() {
        let text = "SrcEntity\tTgtEntity\tScore\nhttp://a/x\thttp://b/y\nhttp://a/x\thttp://b/z\t0.5\t<\n";
        let s = read_mappings(text.as_bytes(), Relation::Equivalence).unwrap();
        let v = s.to_vec();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].confidence, 1.0);
        assert_eq!(v[0].relation, Relation::Equivalence);
        assert_eq!(v[1].relation, Relation::Subsumption);
    }

    #[test]
    fn zero_confidence_rejected() {
        let err = read_mappings("a:x\tb:y\t0.0\n".as_bytes(), Relation::Equivalence).unwrap_err();
        assert!(matches!(err, MappingError::BadConfidence { row: 1 }));
        let err = read_mappings("a:x\tb:y\t1.5\n".as_bytes(), Relation::Equivalence).unwrap_err();
        assert!(matches!(err, MappingError::BadConfidence { row: 1 }));
        let err = read_mappings("a:x\tb:y\tNaN\n".as_bytes(), Relation::Equivalence).unwrap_err();
        assert!(matches!(err, MappingError::BadConfidence { row: 1 }));
    }

    #[test]
    fn near_one_clamped() {
        let s = read_mappings("a:x\tb:y\t1.0000000001\n".as_bytes(), Relation::Equivalence).unwrap();
        assert_eq!(s.to_vec()[0].confidence, 1.0);
    }

    #[test]
    fn bad_rows() {
        let err = read_mappings("a:x\tnot an iri\t0.5\n".as_bytes(), Relation::Equivalence).unwrap_err();
        assert!(matches!(err, MappingError::BadIri { row: 1, .. }));
        let err = read_mappings("a:x\ta:x\t0.5\n".as_bytes(), Relation::Equivalence).unwrap_err();
        assert!(matches!(err, MappingError::SelfMapping { row: 1 }));
        let err = read_mappings("a:x\n".as_bytes(), Relation::Equivalence).unwrap_err();
        assert!(matches!(err, MappingError::MalformedRow { row: 1, .. }));
    }

    #[test]
    fn empty_file() {
        assert!(read_mappings("".as_bytes(), Relation::Equivalence).unwrap().is_empty());
    }

    #[test]
    fn union_takes_max_on_collision() {
        let a = set(&[m("x:x", "y:y", 0.6)]);
        let b = set(&[m("x:x", "y:y", 0.9)]);
        assert_eq!(union(&a, &b).to_vec(), vec![m("x:x", "y:y", 0.9)]);
        assert_eq!(union(&a, &MappingSet::new()), a);
        let c = set(&[m("x:x", "z:z", 0.3)]);
        assert_eq!(union(&a, &c).len(), 2);
    }

    #[test]
    fn intersection_takes_mean() {
        let a = set(&[m("x:x", "y:y", 0.6)]);
        let b = set(&[m("x:x", "y:y", 1.0)]);
        let i = intersection(&a, &b).to_vec();
        assert_eq!(i.len(), 1);
        assert!((i[0].confidence - 0.8).abs() < 1e-15);
        assert!(intersection(&a, &MappingSet::new()).is_empty());
        assert_eq!(intersection(&a, &a), a);
    }

    #[test]
    fn relation_is_part_of_key() {
        let a = set(&[
            m("x:x", "y:y", 0.6),
            Mapping::new(iri("x:x"), iri("y:y"), Relation::Subsumption, 0.4).unwrap(),
        ]);
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn seeds_in_first_occurrence_order() {
        let s = set(&[m("e:x", "e:y", 0.5), m("e:y", "e:z", 0.5)]);
        assert_eq!(seed_entities(&s), vec![iri("e:x"), iri("e:y"), iri("e:z")]);
        assert!(seed_entities(&MappingSet::new()).is_empty());
        let fig = set(&[m("HeLiS:Fructose", "obo:FOODON_03301305", 0.9)]);
        assert_eq!(
            seed_entities(&fig),
            vec![iri("HeLiS:Fructose"), iri("obo:FOODON_03301305")]
        );
    }

    #[test]
    fn tsv_round_trip() {
        let s = set(&[
            m("a:x", "b:y", 0.9),
            Mapping::new(iri("a:x"), iri("b:z"), Relation::Subsumption, 0.123456789).unwrap(),
        ]);
        let mut buf = Vec::new();
        s.write_tsv(&mut buf).unwrap();
        assert_eq!(read_mappings(&buf[..], Relation::Equivalence).unwrap(), s);
    }

    fn arb_set() -> impl Strategy<Value = MappingSet> {
        proptest::collection::vec((0u8..5, 0u8..5, any::<bool>(), 1u32..=1000), 0..12).prop_map(|rows| {
            rows.into_iter()
                .filter(|(s, t, _, _)| s != t)
                .map(|(s, t, sub, c)| {
                    let rel = if sub {
                        Relation::Subsumption
                    } else {
                        Relation::Equivalence
                    };
                    Mapping::new(iri(&format!("a:{s}")), iri(&format!("b:{t}")), rel, c as f64 / 1000.0).unwrap()
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn union_commutative_and_associative(a in arb_set(), b in arb_set(), c in arb_set()) {
            prop_assert_eq!(union(&a, &b).as_map(), union(&b, &a).as_map());
            prop_assert_eq!(
                union(&union(&a, &b), &c).as_map(),
                union(&a, &union(&b, &c)).as_map()
            );
        }

        #[test]
        fn size_bounds_and_seed_superset(a in arb_set(), b in arb_set()) {
            prop_assert!(intersection(&a, &b).len() <= a.len().min(b.len()));
            prop_assert!(union(&a, &b).len() <= a.len() + b.len());
            let seeds_u = seed_entities(&union(&a, &b));
            for s in seed_entities(&a) {
                prop_assert!(seeds_u.contains(&s));
            }
        }
    }
}
