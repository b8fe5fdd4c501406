use super::{Edge, Graph, GraphError};

/// Number of pairs kept for a sparsity ratio over `pairs` candidates:
/// `ceil(rho * pairs)`, snapping products within 1e-9 of an integer so that
/// e.g. `0.7 * 10` keeps 7 pairs rather than 8.
pub(crate) fn kept_pairs(rho: f64, pairs: usize) -> usize {
    let raw = rho * pairs as f64;
    let k = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() };
    (k as usize).min(pairs)
}

/// Binarizes a correlation matrix by keeping the `ceil(rho * n(n-1)/2)`
/// off-diagonal pairs of largest `|corr|`.
///
/// Ties are broken by `(u asc, v asc)`. Kept edges carry unit weight. The
/// matrix rows become the node features, so the result can feed the encoder
/// directly.
pub fn sparsify(corr: &[Vec<f64>], rho: f64) -> Result<Graph, GraphError> {
    let n = corr.len();
    if let Some(row) = corr.iter().position(|r| r.len() != n) {
        return Err(GraphError::Structure(format!(
            "correlation matrix is not square: row {row} has {} entries, expected {n}",
            corr[row].len()
        )));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(GraphError::Parameter(format!("sparsity ratio {rho} outside (0, 1]")));
    }
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            let (a, b) = (corr[u][v], corr[v][u]);
            if !a.is_finite() || !b.is_finite() {
                return Err(GraphError::Structure(format!("non-finite entry at ({u}, {v})")));
            }
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(GraphError::Structure(format!(
                    "correlation matrix is not symmetric at ({u}, {v}): {a} vs {b}"
                )));
            }
            pairs.push((a.abs(), u, v));
        }
    }
    let keep = kept_pairs(rho, pairs.len());
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let edges = pairs.into_iter().take(keep).map(|(_, u, v)| Edge::new(u, v, 1.0)).collect();
    let features = corr.iter().flatten().copied().collect();
    Graph::new(n, edges, n, features, None)
}
