//! PageRank centrality and all-pairs hop distances.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::graph::Graph;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

/// PageRank scores of every node.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralityScores {
    pub scores: Vec<f64>,
    pub damping: f64,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub residual: f64,
    pub converged: bool,
}

impl CentralityScores {
    /// Node ids ordered by descending score, ties by id.
    pub fn ranking(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.scores.len()).collect();
        ids.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        ids
    }
}

/// PageRank with the defaults `d = 0.85`, `tol = 1e-10`, `max_iter = 200`.
pub fn pagerank_default(g: &Graph) -> CentralityScores {
    pagerank(g, DEFAULT_DAMPING, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

/// Power iteration of `PR(v) = (1-d)/n + d * sum_{u ~ v} PR(u) / deg(u)`.
///
/// Rank held by isolated nodes is spread uniformly over all nodes each
/// step, so the scores stay a probability distribution. Iteration stops when
/// the L1 change drops below `tol`; hitting `max_iter` first returns the last
/// iterate with `converged = false`.
pub fn pagerank(g: &Graph, damping: f64, tol: f64, max_iter: usize) -> CentralityScores {
    assert!(damping > 0.0 && damping < 1.0, "damping {damping} outside (0, 1)");
    let n = g.n_nodes();
    if n == 0 {
        return CentralityScores { scores: vec![], damping, iterations: 0, residual: 0.0, converged: true };
    }
    let adj = g.neighbors();
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&v| adj[v].is_empty()).map(|v| rank[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        for (v, nbrs) in adj.iter().enumerate() {
            let inflow: f64 = nbrs.iter().map(|&u| rank[u] / adj[u].len() as f64).sum();
            next[v] = base + damping * inflow;
        }
        // Renormalize to absorb rounding drift.
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        residual = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual < tol {
            break;
        }
    }
    CentralityScores { scores: rank, damping, iterations, residual, converged: residual < tol }
}

/// Hop-count distances with summary statistics over finite off-diagonal
/// ordered pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    /// Row-major; `None` marks an unreachable pair.
    hops: Vec<Option<u32>>,
    pub mean: f64,
    pub std: f64,
    pub finite_pairs: usize,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.hops[i * self.n + j]
    }

    pub fn is_reachable(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_some()
    }
}

fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes are labeled");
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// BFS from every node of the unweighted graph. `mean`/`std` (population)
/// are 0 when there is no finite off-diagonal pair.
pub fn shortest_paths(g: &Graph) -> DistanceMatrix {
    let n = g.n_nodes();
    let adj = g.neighbors();
    let rows: Vec<Vec<Option<u32>>> = if n >= 64 {
        (0..n).into_par_iter().map(|s| bfs(&adj, s)).collect()
    } else {
        (0..n).map(|s| bfs(&adj, s)).collect()
    };
    let hops: Vec<Option<u32>> = rows.into_iter().flatten().collect();
    let finite: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .filter_map(|(i, j)| hops[i * n + j].map(f64::from))
        .collect();
    let (mean, std) = if finite.is_empty() {
        (0.0, 0.0)
    } else {
        let m = finite.iter().sum::<f64>() / finite.len() as f64;
        let var = finite.iter().map(|x| (x - m).powi(2)).sum::<f64>() / finite.len() as f64;
        (m, var.sqrt())
    };
    DistanceMatrix { n, hops, mean, std, finite_pairs: finite.len() }
}
