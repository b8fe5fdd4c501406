//! Graph data model, correlation sparsification, dataset I/O and the
//! synthetic two-class generator.

mod io;
mod sparsify;
mod synthetic;

pub use io::{from_jsonl, load_dataset, save_dataset, to_jsonl};
pub use sparsify::sparsify;
pub use synthetic::{generate_synthetic, SyntheticParams};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("parse error in record {record}: {message}")]
    Parse { record: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An undirected weighted edge with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        Edge { u, v, w }
    }
}

/// Attributed undirected simple graph.
///
/// Edges are stored sorted by `(u, v)` with `u < v`; features are a dense
/// row-major `n_nodes x d_f` block.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<Edge>,
    d_f: usize,
    features: Vec<f64>,
    label: Option<u8>,
}

impl Graph {
    /// Builds a graph, normalizing every edge to `u < v` and sorting the
    /// edge list. Self-loops, duplicate pairs, out-of-range ids, a feature
    /// block of the wrong size and labels other than 0/1 are rejected.
    pub fn new(
        n_nodes: usize,
        edges: Vec<Edge>,
        d_f: usize,
        features: Vec<f64>,
        label: Option<u8>,
    ) -> Result<Self, GraphError> {
        let mut edges = edges;
        for e in edges.iter_mut() {
            if e.u == e.v {
                return Err(GraphError::Structure(format!("self-loop on node {}", e.u)));
            }
            if e.u >= n_nodes || e.v >= n_nodes {
                return Err(GraphError::Structure(format!(
                    "edge ({}, {}) out of range for {} nodes",
                    e.u, e.v, n_nodes
                )));
            }
            if !e.w.is_finite() {
                return Err(GraphError::Structure(format!(
                    "edge ({}, {}) has non-finite weight",
                    e.u, e.v
                )));
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        if let Some(pair) = edges.windows(2).find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v)) {
            return Err(GraphError::Structure(format!(
                "duplicate edge ({}, {})",
                pair[0].u, pair[0].v
            )));
        }
        if features.len() != n_nodes * d_f {
            return Err(GraphError::Structure(format!(
                "feature block has {} values, expected {} x {}",
                features.len(),
                n_nodes,
                d_f
            )));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(GraphError::Structure("non-finite feature value".into()));
        }
        if let Some(l) = label {
            if l > 1 {
                return Err(GraphError::Structure(format!("label {l} is not binary")));
            }
        }
        Ok(Graph { n_nodes, edges, d_f, features, label })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn d_f(&self) -> usize {
        self.d_f
    }

    /// Row-major feature block.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_row(&self, node: usize) -> &[f64] {
        &self.features[node * self.d_f..(node + 1) * self.d_f]
    }

    pub fn label(&self) -> Option<u8> {
        self.label
    }

    /// Adjacency lists, each sorted ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// Same nodes, features and label with a subset of the edges. Edges are
    /// kept in order, so invariants carry over.
    pub(crate) fn with_edges(&self, edges: Vec<Edge>) -> Graph {
        Graph { edges, ..self.clone() }
    }

    pub(crate) fn with_features(&self, features: Vec<f64>) -> Graph {
        debug_assert_eq!(features.len(), self.features.len());
        Graph { features, ..self.clone() }
    }

    pub fn with_label(&self, label: Option<u8>) -> Graph {
        Graph { label: label.map(|l| l.min(1)), ..self.clone() }
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        if perm.len() != self.n_nodes {
            return Err(GraphError::Structure("permutation length mismatch".into()));
        }
        let mut seen = vec![false; self.n_nodes];
        for &p in perm {
            if p >= self.n_nodes || std::mem::replace(&mut seen[p], true) {
                return Err(GraphError::Structure("not a permutation".into()));
            }
        }
        let edges = self.edges.iter().map(|e| Edge::new(perm[e.u], perm[e.v], e.w)).collect();
        let mut features = vec![0.0; self.features.len()];
        for (old, &new) in perm.iter().enumerate() {
            features[new * self.d_f..(new + 1) * self.d_f].copy_from_slice(self.feature_row(old));
        }
        Graph::new(self.n_nodes, edges, self.d_f, features, self.label)
    }
}

/// A collection of graphs sharing a feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub seed: Option<u64>,
    d_f: usize,
    graphs: Vec<Graph>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        seed: Option<u64>,
        d_f: usize,
        graphs: Vec<Graph>,
    ) -> Result<Self, GraphError> {
        if let Some((i, g)) = graphs.iter().enumerate().find(|(_, g)| g.d_f() != d_f) {
            return Err(GraphError::Structure(format!(
                "graph {i} has feature dimension {}, dataset has {d_f}",
                g.d_f()
            )));
        }
        let labeled = graphs.iter().filter(|g| g.label().is_some()).count();
        if labeled != 0 && labeled != graphs.len() {
            return Err(GraphError::Structure(
                "labels must be present on all graphs or on none".into(),
            ));
        }
        Ok(Dataset { name: name.into(), seed, d_f, graphs })
    }

    pub fn d_f(&self) -> usize {
        self.d_f
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        !self.graphs.is_empty() && self.graphs[0].label().is_some()
    }

    pub fn labels(&self) -> Vec<Option<u8>> {
        self.graphs.iter().map(Graph::label).collect()
    }
}
