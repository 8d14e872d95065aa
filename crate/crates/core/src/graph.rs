//! Weighted exclusivity graphs: vertices are events, edges join exclusive pairs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::events::{
    are_equivalent, are_exclusive, parse_tokens, Event, EventError, Outcome, Registry,
};
use crate::scenario::chsh_terms;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("events {first} and {second} are equivalent")]
    DuplicateEvent { first: usize, second: usize },
    #[error("{events} events but {weights} weights")]
    LengthMismatch { events: usize, weights: usize },
    #[error("weight {value} of vertex {vertex} is not a nonnegative finite number")]
    InvalidWeight { vertex: usize, value: f64 },
    #[error("edge ({0}, {1}) is out of range or a loop")]
    InvalidEdge(usize, usize),
    #[error("listed edges disagree with the exclusivity relation at ({0}, {1})")]
    InconsistentEdges(usize, usize),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("malformed graph file: {0}")]
    Json(String),
}

/// Vertices are closed events; `adjacency[i][j]` holds exactly when the events
/// are exclusive.
#[derive(Debug, Clone)]
pub struct ExclusivityGraph {
    vertices: Vec<Event>,
    weights: Vec<f64>,
    adjacency: Vec<Vec<bool>>,
}

/// Builds the exclusivity graph of `events`.
pub fn build_graph(events: Vec<Event>, weights: Vec<f64>) -> Result<ExclusivityGraph, GraphError> {
    if events.len() != weights.len() {
        return Err(GraphError::LengthMismatch {
            events: events.len(),
            weights: weights.len(),
        });
    }
    if let Some((vertex, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
    {
        return Err(GraphError::InvalidWeight { vertex, value });
    }
    let n = events.len();
    let mut adjacency = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if are_equivalent(&events[i], &events[j]) {
                return Err(GraphError::DuplicateEvent {
                    first: i,
                    second: j,
                });
            }
            let edge = are_exclusive(&events[i], &events[j]);
            adjacency[i][j] = edge;
            adjacency[j][i] = edge;
        }
    }
    Ok(ExclusivityGraph {
        vertices: events,
        weights,
        adjacency,
    })
}

/// The eight events of the CHSH sum, `(A_i a, B_j b)`, with unit weights.
pub fn chsh_graph() -> ExclusivityGraph {
    let registry = Registry::two_copy_chsh();
    let events = chsh_terms()
        .iter()
        .map(|&(i, a, j, b)| {
            Event::from_labels(&registry, &[(&format!("A{i}"), a), (&format!("B{j}"), b)])
                .expect("CHSH observables are registered")
        })
        .collect();
    build_graph(events, vec![1.0; 8]).expect("CHSH events are distinct")
}

/// Realizes an arbitrary simple graph as an exclusivity graph.
///
/// Vertex `i` gets a private observable `V<i>`, and each edge `{i, j}` with
/// `i < j` gets an observable `X<i>_<j>` that `i` assigns `+` and `j` assigns `-`.
pub fn from_adjacency(
    n: usize,
    edges: &[(usize, usize)],
    weights: Vec<f64>,
) -> Result<ExclusivityGraph, GraphError> {
    let mut edge_set = BTreeSet::new();
    for &(a, b) in edges {
        if a >= n || b >= n || a == b {
            return Err(GraphError::InvalidEdge(a, b));
        }
        edge_set.insert((a.min(b), a.max(b)));
    }
    let mut registry = Registry::new();
    let vertex_ids = (0..n)
        .map(|i| registry.add_base(&format!("V{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let edge_ids = edge_set
        .iter()
        .map(|&(a, b)| registry.add_base(&format!("X{a}_{b}")))
        .collect::<Result<Vec<_>, _>>()?;
    let registry = Arc::new(registry);
    let mut assignments: Vec<Vec<_>> = vertex_ids
        .iter()
        .map(|&v| vec![(v, Outcome::Plus)])
        .collect();
    for (&(a, b), &id) in edge_set.iter().zip(&edge_ids) {
        assignments[a].push((id, Outcome::Plus));
        assignments[b].push((id, Outcome::Minus));
    }
    let events = assignments
        .iter()
        .map(|a| Event::new(&registry, a))
        .collect::<Result<Vec<_>, _>>()?;
    build_graph(events, weights)
}

pub fn cycle_graph(n: usize) -> ExclusivityGraph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    from_adjacency(n, &edges, vec![1.0; n]).expect("cycle on at least three vertices")
}

pub fn complete_graph(n: usize) -> ExclusivityGraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    from_adjacency(n, &edges, vec![1.0; n]).expect("valid complete graph")
}

pub fn edgeless_graph(n: usize) -> ExclusivityGraph {
    from_adjacency(n, &[], vec![1.0; n]).expect("valid edgeless graph")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<VertexEntry>,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VertexEntry {
    event: String,
    weight: f64,
}

impl ExclusivityGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Event] {
        &self.vertices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i]
            .iter()
            .enumerate()
            .filter_map(|(j, &e)| e.then_some(j))
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| {
                (i + 1..n)
                    .filter(move |&j| self.adjacency[i][j])
                    .map(move |j| (i, j))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Adjacency matrix of the complement graph (zero diagonal).
    pub fn complement(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| i != j && !self.adjacency[i][j]).collect())
            .collect()
    }

    pub fn is_triangle_free(&self) -> bool {
        let n = self.len();
        !(0..n).any(|i| {
            (i + 1..n).any(|j| {
                self.adjacency[i][j]
                    && (j + 1..n).any(|k| self.adjacency[i][k] && self.adjacency[j][k])
            })
        })
    }

    /// Same events and adjacency, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<ExclusivityGraph, GraphError> {
        build_graph(self.vertices.clone(), weights)
    }

    /// Applies a vertex permutation: vertex `i` of the result is vertex
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<ExclusivityGraph, GraphError> {
        let events = order.iter().map(|&i| self.vertices[i].clone()).collect();
        let weights = order.iter().map(|&i| self.weights[i]).collect();
        build_graph(events, weights)
    }

    /// Undirected DOT text. Node labels use the event grammar.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("graph exclusivity {\n");
        for (i, (event, w)) in self.vertices.iter().zip(&self.weights).enumerate() {
            let _ = writeln!(out, "  {i} [label=\"{event}\", weight={w}];");
        }
        for (i, j) in self.edges() {
            let _ = writeln!(out, "  {i} -- {j};");
        }
        out.push_str("}\n");
        out
    }

    fn to_file(&self, canonical: bool) -> GraphFile {
        GraphFile {
            vertices: self
                .vertices
                .iter()
                .zip(&self.weights)
                .map(|(e, &weight)| VertexEntry {
                    event: if canonical {
                        canonical_event_string(e)
                    } else {
                        e.to_string()
                    },
                    weight,
                })
                .collect(),
            edges: self.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file(false)).expect("graph serializes")
    }

    /// Hex SHA-256 of the compact JSON form with each event's tokens sorted.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(&self.to_file(true)).expect("graph serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Parses the JSON produced by [`ExclusivityGraph::to_json`].
    ///
    /// Events are read over the two-copy CHSH observables; unknown labels are
    /// registered as additional base observables. The listed edges must agree
    /// with the exclusivity relation of the parsed events.
    pub fn from_json(text: &str) -> Result<ExclusivityGraph, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))?;
        let standard = Registry::two_copy_chsh();
        let mut extended: Option<Registry> = None;
        for v in &file.vertices {
            for (label, _) in parse_tokens(&v.event)? {
                if standard.lookup(&label).is_none() {
                    let r = extended.get_or_insert_with(|| (*standard).clone());
                    if r.lookup(&label).is_none() {
                        r.add_base(&label)?;
                    }
                }
            }
        }
        let registry = extended.map_or(standard, Arc::new);
        let events = file
            .vertices
            .iter()
            .map(|v| Event::parse(&registry, &v.event))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = file.vertices.iter().map(|v| v.weight).collect();
        let graph = build_graph(events, weights)?;
        let n = graph.len();
        let mut listed = vec![vec![false; n]; n];
        for &[i, j] in &file.edges {
            if i >= n || j >= n || i == j {
                return Err(GraphError::InvalidEdge(i, j));
            }
            listed[i][j] = true;
            listed[j][i] = true;
        }
        let mismatch = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| listed[i][j] != graph.adjacency[i][j]);
        match mismatch {
            Some((i, j)) => Err(GraphError::InconsistentEdges(i, j)),
            None => Ok(graph),
        }
    }
}

fn canonical_event_string(e: &Event) -> String {
    let mut tokens: Vec<String> = e
        .assignment()
        .into_iter()
        .map(|(id, o)| format!("{}{}", e.registry().label(id), o))
        .collect();
    tokens.sort();
    tokens.join(" ")
}

/// Graphs are equal when they have the same weights, adjacency, and events
/// (compared by observable label, independent of registry order).
impl PartialEq for ExclusivityGraph {
    fn eq(&self, other: &Self) -> bool {
        self.weights == other.weights
            && self.adjacency == other.adjacency
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| canonical_event_string(a) == canonical_event_string(b))
    }
}
