use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Edge, Graph, GraphError};
use crate::seed;

const BASE_INTRA: f64 = 0.3;
const INTER: f64 = 0.1;
const NOISE_SIGMA: f64 = 0.1;

/// Parameters of the two-class stochastic-block-model generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticParams {
    pub n_graphs: usize,
    pub n_nodes: usize,
    pub d_f: usize,
    pub class_gap: f64,
    pub seed: u64,
}

/// Generates a balanced two-class dataset.
///
/// Every graph is a 2-block SBM (first `ceil(n/2)` nodes in block 0). Class 0
/// uses intra-block probability `0.3 + class_gap`, class 1 uses
/// `0.3 - class_gap`; inter-block probability is 0.1 for both. Node features
/// are the one-hot block id plus N(0, 0.1) noise on every dimension, and
/// class-1 graphs get `+class_gap` added to feature 0. Graph `i` has label
/// `i % 2`.
pub fn generate_synthetic(p: SyntheticParams) -> Result<Dataset, GraphError> {
    if p.n_graphs % 2 != 0 {
        return Err(GraphError::Parameter(format!(
            "n_graphs must be even for balanced classes, got {}",
            p.n_graphs
        )));
    }
    if !(p.class_gap >= 0.0) {
        return Err(GraphError::Parameter(format!("class_gap {} must be >= 0", p.class_gap)));
    }
    let (hi, lo) = (BASE_INTRA + p.class_gap, BASE_INTRA - p.class_gap);
    if hi > 1.0 || lo < 0.0 {
        return Err(GraphError::Parameter(format!(
            "class_gap {} pushes intra-block probabilities outside [0, 1]",
            p.class_gap
        )));
    }
    if p.d_f < 2 {
        return Err(GraphError::Parameter(format!(
            "d_f must be at least 2 to hold the block id, got {}",
            p.d_f
        )));
    }
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    let mut rng = seed::rng(p.seed);
    let half = p.n_nodes.div_ceil(2);
    let block = |v: usize| usize::from(v >= half);

    let mut graphs = Vec::with_capacity(p.n_graphs);
    for i in 0..p.n_graphs {
        let label = (i % 2) as u8;
        let p_in = if label == 0 { hi } else { lo };
        let mut edges = Vec::new();
        for u in 0..p.n_nodes {
            for v in (u + 1)..p.n_nodes {
                let prob = if block(u) == block(v) { p_in } else { INTER };
                if rng.random::<f64>() < prob {
                    edges.push(Edge::new(u, v, 1.0));
                }
            }
        }
        let mut features = vec![0.0; p.n_nodes * p.d_f];
        for v in 0..p.n_nodes {
            let row = &mut features[v * p.d_f..(v + 1) * p.d_f];
            row[block(v)] = 1.0;
            for x in row.iter_mut() {
                *x += noise.sample(&mut rng);
            }
            if label == 1 {
                row[0] += p.class_gap;
            }
        }
        graphs.push(Graph::new(p.n_nodes, edges, p.d_f, features, Some(label))?);
    }
    Dataset::new(
        format!("sbm-n{}-gap{}", p.n_nodes, p.class_gap),
        Some(p.seed),
        p.d_f,
        graphs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gap: f64, seed: u64) -> SyntheticParams {
        SyntheticParams { n_graphs: 40, n_nodes: 20, d_f: 4, class_gap: gap, seed }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(params(0.2, 3)).unwrap();
        let b = generate_synthetic(params(0.2, 3)).unwrap();
        let c = generate_synthetic(params(0.2, 4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(super::super::to_jsonl(&a), super::super::to_jsonl(&b));
        assert_ne!(a, c);
    }

    #[test]
    fn balanced_labels() {
        let d = generate_synthetic(params(0.1, 1)).unwrap();
        let ones = d.graphs().iter().filter(|g| g.label() == Some(1)).count();
        assert_eq!(ones, 20);
        assert!(d.is_labeled());
    }

    #[test]
    fn parameter_errors() {
        assert!(generate_synthetic(params(0.31, 0)).is_err());
        assert!(generate_synthetic(params(-0.1, 0)).is_err());
        assert!(generate_synthetic(SyntheticParams { n_graphs: 3, ..params(0.1, 0) }).is_err());
        assert!(generate_synthetic(SyntheticParams { d_f: 1, ..params(0.1, 0) }).is_err());
    }

    #[test]
    fn class_gap_shifts_density_and_feature() {
        let d = generate_synthetic(SyntheticParams { n_graphs: 200, ..params(0.2, 9) }).unwrap();
        let mean = |label: u8, f: &dyn Fn(&Graph) -> f64| {
            let gs: Vec<_> = d.graphs().iter().filter(|g| g.label() == Some(label)).collect();
            gs.iter().map(|g| f(g)).sum::<f64>() / gs.len() as f64
        };
        let edges = |g: &Graph| g.n_edges() as f64;
        let feat0 = |g: &Graph| (0..g.n_nodes()).map(|v| g.feature_row(v)[0]).sum::<f64>() / g.n_nodes() as f64;
        // 20 nodes, blocks of 10: 90 intra pairs, 100 inter pairs.
        assert!((mean(0, &edges) - (90.0 * 0.5 + 10.0)).abs() < 3.0);
        assert!((mean(1, &edges) - (90.0 * 0.1 + 10.0)).abs() < 3.0);
        assert!((mean(1, &feat0) - mean(0, &feat0) - 0.2).abs() < 0.02);
    }

    #[test]
    fn zero_gap_classes_share_distribution() {
        let d = generate_synthetic(SyntheticParams { n_graphs: 400, ..params(0.0, 5) }).unwrap();
        let density = |label: u8| {
            d.graphs().iter().filter(|g| g.label() == Some(label)).map(|g| g.n_edges() as f64).sum::<f64>()
                / 200.0
        };
        // 90 * 0.3 + 10 = 37 expected edges for both classes.
        assert!((density(0) - 37.0).abs() < 1.5);
        assert!((density(1) - 37.0).abs() < 1.5);
    }
}
