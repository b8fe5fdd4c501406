//! Per-graph constants consumed by the encoder.

use crate::autodiff::Tensor;
use crate::centrality::{shortest_paths, DistanceMatrix};
use crate::graph::Graph;

/// Below this spread of hop distances the Gaussian mask is flat.
pub const MIN_SIGMA: f64 = 1e-6;

/// `D^-1/2 (A + I) D^-1/2` of the binarized adjacency.
pub fn normalized_adjacency(g: &Graph) -> Tensor {
    let n = g.n_nodes();
    let mut a = Tensor::identity(n);
    for e in g.edges() {
        a.set(e.u, e.v, 1.0);
        a.set(e.v, e.u, 1.0);
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|i| 1.0 / a.row(i).iter().sum::<f64>().sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            if v != 0.0 {
                a.set(i, j, v * inv_sqrt[i] * inv_sqrt[j]);
            }
        }
    }
    a
}

/// Multiplicative attention mask and the pairs left out of the softmax.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianMask {
    /// `exp(-(psi - mu)^2 / (2 sigma^2))` on reachable pairs, 1 elsewhere.
    pub weights: Tensor,
    /// Row-major; `true` for unreachable pairs.
    pub exclude: Vec<bool>,
}

/// Gaussian decay of hop distance around its mean. When the distances have
/// no spread (`sigma < 1e-6`) every reachable pair gets weight 1.
pub fn gaussian_mask(dist: &DistanceMatrix) -> GaussianMask {
    let n = dist.n();
    let mut weights = Tensor::filled(n, n, 1.0);
    let mut exclude = vec![false; n * n];
    let flat = dist.std < MIN_SIGMA;
    for i in 0..n {
        for j in 0..n {
            match dist.get(i, j) {
                None => exclude[i * n + j] = true,
                Some(_) if flat => {}
                Some(h) => {
                    let z = f64::from(h) - dist.mean;
                    weights.set(i, j, (-z * z / (2.0 * dist.std * dist.std)).exp());
                }
            }
        }
    }
    GaussianMask { weights, exclude }
}

/// Features, normalized adjacency and attention mask of one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedGraph {
    pub x: Tensor,
    pub a_hat: Tensor,
    pub mask: GaussianMask,
}

impl PreparedGraph {
    pub fn new(g: &Graph) -> Self {
        let x = Tensor::new(g.n_nodes(), g.d_f(), g.features().to_vec()).expect("graph features are n x d_f");
        PreparedGraph { x, a_hat: normalized_adjacency(g), mask: gaussian_mask(&shortest_paths(g)) }
    }

    pub fn n_nodes(&self) -> usize {
        self.x.rows()
    }
}
