//! The merged weighted graph: projected ontology edges plus seed-mapping
//! bridges, with per-vertex transition distributions.
//!
//! Ontology edges carry weight 1.0 and mapping edges carry the mapping's
//! confidence. From a vertex `u` with outgoing edges `l_1..l_n`, edge `l_j` is
//! taken with probability `w(l_j) / sum_i w(l_i)`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::alignment::{MappingSet, Relation};
use crate::ntriples::Iri;
use crate::projection::{self, ProjectedEdge};
use crate::tsv::TsvError;
use crate::vocab;

/// Out-degree above which a vertex gets a guide table for sampling.
pub const GUIDE_TABLE_THRESHOLD: usize = 64;

pub type VertexId = usize;
pub type LabelId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub label: LabelId,
    pub target: VertexId,
    pub weight: f64,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {0} has no outgoing edges")]
    EmptyFrontier(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
}

#[derive(Debug, Clone, Default)]
struct Sampler {
    /// Running sums of the sorted adjacency weights.
    cumulative: Vec<f64>,
    /// `guide[b]` is the first edge whose cumulative weight exceeds
    /// `b / n` of the total; empty for low-degree vertices.
    guide: Vec<u32>,
}

/// `G = (V, E, U, W)`: vertices and edge labels are both IRIs, edges are
/// stored per source vertex sorted by `(target IRI, label IRI)`.
#[derive(Debug, Clone, Default)]
pub struct WeightedGraph {
    vertices: Vec<Iri>,
    vertex_index: HashMap<Iri, VertexId>,
    labels: Vec<Iri>,
    adjacency: Vec<Vec<Edge>>,
    samplers: Vec<Sampler>,
}

type EdgeKey = (Iri, Iri, Iri);

impl WeightedGraph {
    /// Builds the graph from explicit weighted edges. Self-loops are dropped
    /// and a repeated `(source, label, target)` keeps its largest weight.
    pub fn from_edges<I: IntoIterator<Item = ProjectedEdge>>(edges: I) -> Self {
        let mut best: HashMap<EdgeKey, f64> = HashMap::new();
        for e in edges {
            debug_assert!(e.weight > 0.0 && e.weight <= 1.0);
            if e.source == e.target {
                continue;
            }
            best.entry((e.source, e.label, e.target))
                .and_modify(|w| *w = w.max(e.weight))
                .or_insert(e.weight);
        }
        Self::build(best)
    }

    fn build(best: HashMap<EdgeKey, f64>) -> Self {
        let mut vertices: Vec<Iri> = best.keys().flat_map(|(s, _, t)| [s.clone(), t.clone()]).collect();
        vertices.sort();
        vertices.dedup();
        let mut labels: Vec<Iri> = best.keys().map(|(_, l, _)| l.clone()).collect();
        labels.sort();
        labels.dedup();

        let vertex_index: HashMap<Iri, VertexId> = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let label_index: HashMap<&Iri, LabelId> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();

        let mut adjacency = vec![Vec::new(); vertices.len()];
        for ((s, l, t), w) in &best {
            adjacency[vertex_index[s]].push(Edge {
                label: label_index[l],
                target: vertex_index[t],
                weight: *w,
            });
        }
        // ids follow IRI order, so this is (target IRI, label IRI) order
        for list in &mut adjacency {
            list.sort_by_key(|e| (e.target, e.label));
        }
        let samplers = adjacency.iter().map(|edges| Sampler::new(edges)).collect();

        WeightedGraph {
            vertices,
            vertex_index,
            labels,
            adjacency,
            samplers,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn vertex(&self, iri: &str) -> Option<VertexId> {
        self.vertex_index.get(iri).copied()
    }

    pub fn vertex_iri(&self, v: VertexId) -> &Iri {
        &self.vertices[v]
    }

    pub fn label_iri(&self, l: LabelId) -> &Iri {
        &self.labels[l]
    }

    pub fn vertices(&self) -> &[Iri] {
        &self.vertices
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.adjacency[v]
    }

    /// Weight of the edge `(source, label, target)` if present.
    pub fn weight(&self, source: &str, label: &str, target: &str) -> Option<f64> {
        let s = self.vertex(source)?;
        let t = self.vertex(target)?;
        self.adjacency[s]
            .iter()
            .find(|e| e.target == t && self.labels[e.label].as_str() == label)
            .map(|e| e.weight)
    }

    /// Outgoing edges of `u` with their selection probabilities.
    pub fn transition_distribution(&self, u: VertexId) -> Result<Vec<(Edge, f64)>, GraphError> {
        let edges = &self.adjacency[u];
        if edges.is_empty() {
            return Err(GraphError::EmptyFrontier(self.vertices[u].to_string()));
        }
        let total: f64 = edges.iter().map(|e| e.weight).sum();
        Ok(edges.iter().map(|e| (*e, e.weight / total)).collect())
    }

    /// Picks an outgoing edge of `u` by inverting the cumulative weight
    /// distribution at `x`, a uniform variate in `[0, 1)`. High-degree
    /// vertices start the scan from a guide table; the result is the same edge
    /// a plain scan would return.
    pub fn sample_edge(&self, u: VertexId, x: f64) -> Option<&Edge> {
        let edges = &self.adjacency[u];
        let idx = self.samplers[u].pick(x)?;
        Some(&edges[idx])
    }

    /// Edge dump in `source \t label \t target \t weight` form, vertex order.
    pub fn to_edges(&self) -> Vec<ProjectedEdge> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (s, edges) in self.adjacency.iter().enumerate() {
            for e in edges {
                out.push(ProjectedEdge {
                    source: self.vertices[s].clone(),
                    label: self.labels[e.label].clone(),
                    target: self.vertices[e.target].clone(),
                    weight: e.weight,
                });
            }
        }
        out
    }

    pub fn write_tsv<W: Write>(&self, out: W) -> std::io::Result<()> {
        projection::write_edges_tsv(&self.to_edges(), out)
    }

    pub fn read_tsv<R: BufRead>(input: R) -> Result<Self, TsvError> {
        Ok(Self::from_edges(projection::read_edges_tsv(input)?))
    }
}

impl Sampler {
    fn new(edges: &[Edge]) -> Self {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = edges
            .iter()
            .map(|e| {
                acc += e.weight;
                acc
            })
            .collect();
        let mut guide = Vec::new();
        if edges.len() > GUIDE_TABLE_THRESHOLD {
            let n = edges.len();
            let total = acc;
            let mut j = 0;
            for b in 0..n {
                let threshold = (b as f64 / n as f64) * total;
                while j < n - 1 && cumulative[j] <= threshold {
                    j += 1;
                }
                guide.push(j as u32);
            }
        }
        Sampler { cumulative, guide }
    }

    fn pick(&self, x: f64) -> Option<usize> {
        let n = self.cumulative.len();
        if n == 0 {
            return None;
        }
        let total = self.cumulative[n - 1];
        let target = x * total;
        let mut j = if self.guide.is_empty() {
            0
        } else {
            let bucket = ((x * n as f64) as usize).min(n - 1);
            let mut j = self.guide[bucket] as usize;
            // guard against rounding in the bucket threshold
            while j > 0 && self.cumulative[j - 1] > target {
                j -= 1;
            }
            j
        };
        while j < n - 1 && self.cumulative[j] <= target {
            j += 1;
        }
        Some(j)
    }
}

/// Merges ontology projections and seed mappings into one graph.
///
/// Equivalence mappings become a pair of `owl:equivalentClass` edges, one per
/// direction, and subsumption mappings a single `rdfs:subClassOf` edge from
/// source to target; both weighted by the mapping confidence.
pub fn merge(projections: &[Vec<ProjectedEdge>], mappings: &MappingSet) -> WeightedGraph {
    let equivalent = Iri::new(vocab::OWL_EQUIVALENT_CLASS).expect("static IRI");
    let subclass = Iri::new(vocab::RDFS_SUBCLASS_OF).expect("static IRI");

    let ontology_edges = projections.iter().flatten().map(|e| ProjectedEdge {
        weight: 1.0,
        ..e.clone()
    });
    let mapping_edges = mappings.iter().flat_map(|m| {
        let forward = ProjectedEdge {
            source: m.source.clone(),
            label: match m.relation {
                Relation::Equivalence => equivalent.clone(),
                Relation::Subsumption => subclass.clone(),
            },
            target: m.target.clone(),
            weight: m.confidence,
        };
        let backward = (m.relation == Relation::Equivalence).then(|| ProjectedEdge {
            source: m.target.clone(),
            label: equivalent.clone(),
            target: m.source.clone(),
            weight: m.confidence,
        });
        std::iter::once(forward).chain(backward)
    });
    WeightedGraph::from_edges(ontology_edges.chain(mapping_edges))
}
