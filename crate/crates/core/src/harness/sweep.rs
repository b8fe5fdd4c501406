//! Hyperparameter sweeps and the ablation table.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::cv::cross_validate;
use super::report::{Report, ReportRow};
use super::{HarnessError, TrainConfig};
use crate::graph::{sparsify, Dataset, Graph};

struct Point {
    name: String,
    settings: Vec<(String, Value)>,
    cfg: TrainConfig,
    data: Option<Dataset>,
}

fn run(kind: &str, dataset: &Dataset, points: Vec<Point>) -> Result<Report, HarnessError> {
    if points.is_empty() {
        return Err(HarnessError::Config(format!("{kind} sweep grid is empty")));
    }
    let rows = points
        .into_par_iter()
        .map(|p| {
            let cv = cross_validate(p.data.as_ref().unwrap_or(dataset), &p.cfg)?;
            Ok(ReportRow { name: p.name, settings: p.settings, summary: cv.summary })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    Ok(Report { kind: kind.into(), rows })
}

/// Rebinarizes every graph at sparsity `rho`, reading its node features as
/// the correlation matrix it was built from.
pub fn resparsify(dataset: &Dataset, rho: f64) -> Result<Dataset, HarnessError> {
    let graphs = dataset
        .graphs()
        .iter()
        .enumerate()
        .map(|(i, g)| -> Result<Graph, HarnessError> {
            let n = g.n_nodes();
            if g.d_f() != n {
                return Err(HarnessError::Data(format!(
                    "graph {i}: features are {n} x {}, not a correlation matrix",
                    g.d_f()
                )));
            }
            let corr: Vec<Vec<f64>> = (0..n).map(|r| g.feature_row(r).to_vec()).collect();
            for a in 0..n {
                for b in 0..a {
                    if (corr[a][b] - corr[b][a]).abs() > 1e-9 {
                        return Err(HarnessError::Data(format!("graph {i}: feature matrix is not symmetric")));
                    }
                }
            }
            Ok(sparsify(&corr, rho)?.with_label(g.label()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset::new(dataset.name.clone(), dataset.seed, dataset.d_f(), graphs)?)
}

pub fn sweep_sparsity(dataset: &Dataset, grid: &[f64], cfg: &TrainConfig) -> Result<Report, HarnessError> {
    let points = grid
        .iter()
        .map(|&rho| {
            Ok(Point {
                name: format!("rho={rho}"),
                settings: vec![("rho".into(), json!(rho))],
                cfg: TrainConfig { rho, ..cfg.clone() },
                data: Some(resparsify(dataset, rho)?),
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    run("sparsity", dataset, points)
}

pub fn sweep_layers(dataset: &Dataset, grid: &[usize], cfg: &TrainConfig) -> Result<Report, HarnessError> {
    let points = grid
        .iter()
        .map(|&layers| Point {
            name: format!("L={layers}"),
            settings: vec![("layers".into(), json!(layers))],
            cfg: TrainConfig { layers, ..cfg.clone() },
            data: None,
        })
        .collect();
    run("layers", dataset, points)
}

/// Full `lambda1 x lambda2` grid, `lambda1` major.
pub fn sweep_lambdas(
    dataset: &Dataset,
    lambda1_grid: &[f64],
    lambda2_grid: &[f64],
    cfg: &TrainConfig,
) -> Result<Report, HarnessError> {
    let mut points = Vec::new();
    for &lambda1 in lambda1_grid {
        for &lambda2 in lambda2_grid {
            points.push(Point {
                name: format!("l1={lambda1},l2={lambda2}"),
                settings: vec![("lambda1".into(), json!(lambda1)), ("lambda2".into(), json!(lambda2))],
                cfg: TrainConfig { lambda1, lambda2, ..cfg.clone() },
                data: None,
            });
        }
    }
    run("lambdas", dataset, points)
}

/// Ablation rows as `(name, use_augment, use_ddformer, use_gcl, use_topo)`.
pub const ABLATION_ROWS: [(&str, bool, bool, bool, bool); 8] = [
    ("GCN", false, false, false, false),
    ("DDformer", false, true, false, false),
    ("GCN+Ada", true, false, false, false),
    ("DDformer+Ada", true, true, false, false),
    ("GCN+Ada+GCL", true, false, true, false),
    ("DDformer+Ada+GCL", true, true, true, false),
    ("GCN+Ada+GCL+Topo", true, false, true, true),
    ("DDformer+Ada+GCL+Topo", true, true, true, true),
];

pub fn ablate(dataset: &Dataset, cfg: &TrainConfig) -> Result<Report, HarnessError> {
    let points = ABLATION_ROWS
        .iter()
        .map(|&(name, use_augment, use_ddformer, use_gcl, use_topo)| Point {
            name: name.into(),
            settings: vec![
                ("ada".into(), json!(use_augment)),
                ("ddformer".into(), json!(use_ddformer)),
                ("gcl".into(), json!(use_gcl)),
                ("topo".into(), json!(use_topo)),
            ],
            cfg: TrainConfig { use_augment, use_ddformer, use_gcl, use_topo, ..cfg.clone() },
            data: None,
        })
        .collect();
    run("ablation", dataset, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_synthetic, SyntheticParams};

    #[test]
    fn empty_grids_are_rejected() {
        let ds = generate_synthetic(SyntheticParams { n_graphs: 10, n_nodes: 6, d_f: 2, class_gap: 0.1, seed: 0 }).unwrap();
        let cfg = TrainConfig::default();
        assert!(matches!(sweep_layers(&ds, &[], &cfg), Err(HarnessError::Config(_))));
        assert!(matches!(sweep_lambdas(&ds, &[0.1], &[], &cfg), Err(HarnessError::Config(_))));
    }

    #[test]
    fn resparsify_needs_square_symmetric_features() {
        let ds = generate_synthetic(SyntheticParams { n_graphs: 4, n_nodes: 6, d_f: 2, class_gap: 0.1, seed: 0 }).unwrap();
        assert!(resparsify(&ds, 0.3).is_err());
        let corr = vec![vec![1.0, 0.5, -0.2], vec![0.5, 1.0, 0.9], vec![-0.2, 0.9, 1.0]];
        let g = sparsify(&corr, 1.0).unwrap().with_label(Some(1));
        let ds = Dataset::new("c", None, 3, vec![g]).unwrap();
        let sparse = resparsify(&ds, 0.34).unwrap();
        assert_eq!(sparse.graphs()[0].n_edges(), 2);
        assert_eq!(sparse.graphs()[0].label(), Some(1));
    }

    #[test]
    fn ablation_table_has_eight_distinct_rows() {
        let mut seen: Vec<_> = ABLATION_ROWS.iter().map(|r| (r.1, r.2, r.3, r.4)).collect();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert_eq!(ABLATION_ROWS[0], ("GCN", false, false, false, false));
        assert_eq!(ABLATION_ROWS[7], ("DDformer+Ada+GCL+Topo", true, true, true, true));
    }
}
