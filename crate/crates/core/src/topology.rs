//! Zero-dimensional persistent homology of lower-star graph filtrations and
//! a fixed-length vectorization of the resulting diagrams.

use serde::{Deserialize, Serialize};

use crate::centrality::CentralityScores;
use crate::graph::Graph;

pub const DEFAULT_K: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SimplexKind {
    Vertex,
    Edge { u: usize, v: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simplex {
    pub value: f64,
    /// Vertex id, or index into the graph's edge list.
    pub id: usize,
    pub kind: SimplexKind,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        match self.kind {
            SimplexKind::Vertex => 0,
            SimplexKind::Edge { .. } => 1,
        }
    }
}

/// Simplices of a graph ordered by entry value.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    pub n_vertices: usize,
    pub simplices: Vec<Simplex>,
}

/// Lower-star filtration: vertex `v` enters at `f[v]`, edge `(u, v)` at
/// `max(f[u], f[v])`. Sorted by `(value, dim, id)`.
pub fn lower_star_filtration(g: &Graph, f: &[f64]) -> Filtration {
    assert_eq!(f.len(), g.n_nodes(), "one filtration value per node");
    assert!(f.iter().all(|x| x.is_finite()), "filtration values must be finite");
    let mut simplices: Vec<Simplex> = f
        .iter()
        .enumerate()
        .map(|(id, &value)| Simplex { value, id, kind: SimplexKind::Vertex })
        .collect();
    simplices.extend(g.edges().iter().enumerate().map(|(id, e)| Simplex {
        value: f[e.u].max(f[e.v]),
        id,
        kind: SimplexKind::Edge { u: e.u, v: e.v },
    }));
    simplices.sort_by(|a, b| {
        a.value.total_cmp(&b.value).then(a.dim().cmp(&b.dim())).then(a.id.cmp(&b.id))
    });
    Filtration { n_vertices: g.n_nodes(), simplices }
}

/// H0 persistence diagram plus the number of independent cycles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    /// Finite `(birth, death)` pairs in the order the deaths occur.
    pub pairs: Vec<(f64, f64)>,
    /// Births of classes that never die, ascending.
    pub essential: Vec<f64>,
    /// Largest filtration value; essential classes are finitized here.
    pub max_value: f64,
    /// `|E| - |V| + #components`.
    pub cycle_rank: usize,
    pub dimension: usize,
}

impl PersistenceDiagram {
    /// Persistences of all classes, essential ones finitized at `max_value`.
    pub fn persistences(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|(b, d)| d - b)
            .chain(self.essential.iter().map(|b| self.max_value - b))
            .collect()
    }
}

struct Components {
    parent: Vec<usize>,
    /// `(birth, creator vertex)` of the component rooted here.
    key: Vec<(f64, usize)>,
}

impl Components {
    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }
}

fn older(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Union-find sweep with the elder rule: when an edge joins two components,
/// the younger one (later birth, ties broken by the larger creating vertex)
/// dies at the edge's value. Zero-persistence pairs are kept.
pub fn persistence_h0(filtration: &Filtration) -> PersistenceDiagram {
    let n = filtration.n_vertices;
    let mut comps = Components { parent: (0..n).collect(), key: vec![(0.0, 0); n] };
    let mut present = vec![false; n];
    let mut pairs = Vec::new();
    let mut cycle_rank = 0;
    let mut max_value = f64::NEG_INFINITY;
    for s in &filtration.simplices {
        max_value = max_value.max(s.value);
        match s.kind {
            SimplexKind::Vertex => {
                present[s.id] = true;
                comps.key[s.id] = (s.value, s.id);
            }
            SimplexKind::Edge { u, v } => {
                debug_assert!(present[u] && present[v], "edge before its vertices");
                let (ru, rv) = (comps.find(u), comps.find(v));
                if ru == rv {
                    cycle_rank += 1;
                    continue;
                }
                let (survivor, dying) =
                    if older(comps.key[ru], comps.key[rv]) { (ru, rv) } else { (rv, ru) };
                pairs.push((comps.key[dying].0, s.value));
                comps.parent[dying] = survivor;
            }
        }
    }
    let mut roots: Vec<(f64, usize)> = Vec::new();
    for v in 0..n {
        if present[v] && comps.find(v) == v {
            roots.push(comps.key[v]);
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    PersistenceDiagram {
        pairs,
        essential: roots.into_iter().map(|(b, _)| b).collect(),
        max_value: if max_value.is_finite() { max_value } else { 0.0 },
        cycle_rank,
        dimension: 0,
    }
}

/// Fixed-length diagram summary: the `k` largest persistences (descending,
/// zero-padded) followed by total persistence, finite-pair count and cycle
/// rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopoVector {
    pub values: Vec<f64>,
}

impl TopoVector {
    pub fn from_diagram(d: &PersistenceDiagram, k: usize) -> Self {
        let mut pers = d.persistences();
        let total: f64 = pers.iter().sum();
        pers.sort_by(|a, b| b.total_cmp(a));
        pers.resize(k, 0.0);
        pers.extend([total, d.pairs.len() as f64, d.cycle_rank as f64]);
        TopoVector { values: pers }
    }

    pub fn zeros(k: usize) -> Self {
        TopoVector { values: vec![0.0; k + 3] }
    }

    pub fn k(&self) -> usize {
        self.values.len() - 3
    }

    pub fn total_persistence(&self) -> f64 {
        self.values[self.k()]
    }

    pub fn finite_pairs(&self) -> f64 {
        self.values[self.k() + 1]
    }

    pub fn cycle_rank(&self) -> f64 {
        self.values[self.k() + 2]
    }
}

/// Diagram of `g` under the lower-star filtration of its own PageRank.
pub fn diagram_for(g: &Graph, phi: &CentralityScores) -> PersistenceDiagram {
    persistence_h0(&lower_star_filtration(g, &phi.scores))
}

/// Topological descriptor of a view; `phi` must be computed on `g` itself.
pub fn topo_descriptor(g: &Graph, phi: &CentralityScores, k: usize) -> TopoVector {
    if g.n_nodes() == 0 {
        return TopoVector::zeros(k);
    }
    TopoVector::from_diagram(&diagram_for(g, phi), k)
}
