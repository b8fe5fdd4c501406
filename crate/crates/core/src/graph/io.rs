//! Line-delimited JSON dataset files.
//!
//! The first line may be a header `{"meta": {"name": .., "seed": .., "d_f": ..}}`;
//! every other non-empty line is one graph record with fields `n_nodes`,
//! `edges` (list of `[u, v, w]`), `features` (`n_nodes` rows of `d_f` reals)
//! and `label` (0, 1 or null).

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, Edge, Graph, GraphError};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    n_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    features: Vec<Vec<f64>>,
    label: Option<u8>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    name: String,
    seed: Option<u64>,
    d_f: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaRecord {
    meta: Meta,
}

impl GraphRecord {
    fn from_graph(g: &Graph) -> Self {
        GraphRecord {
            n_nodes: g.n_nodes(),
            edges: g.edges().iter().map(|e| (e.u, e.v, e.w)).collect(),
            features: (0..g.n_nodes()).map(|v| g.feature_row(v).to_vec()).collect(),
            label: g.label(),
        }
    }

    fn into_graph(self, d_f: Option<usize>) -> Result<Graph, String> {
        if self.features.len() != self.n_nodes {
            return Err(format!(
                "{} feature rows for {} nodes",
                self.features.len(),
                self.n_nodes
            ));
        }
        let width = d_f.or_else(|| self.features.first().map(Vec::len)).unwrap_or(0);
        if let Some(r) = self.features.iter().position(|row| row.len() != width) {
            return Err(format!(
                "feature row {r} has {} values, expected d_f = {width}",
                self.features[r].len()
            ));
        }
        let edges = self.edges.into_iter().map(|(u, v, w)| Edge::new(u, v, w)).collect();
        let features = self.features.into_iter().flatten().collect();
        Graph::new(self.n_nodes, edges, width, features, self.label).map_err(|e| e.to_string())
    }
}

/// Serializes a dataset, header line first.
pub fn to_jsonl(d: &Dataset) -> String {
    let meta = MetaRecord { meta: Meta { name: d.name.clone(), seed: d.seed, d_f: d.d_f() } };
    let mut out = serde_json::to_string(&meta).expect("meta serializes");
    out.push('\n');
    for g in d.graphs() {
        out.push_str(&serde_json::to_string(&GraphRecord::from_graph(g)).expect("graph serializes"));
        out.push('\n');
    }
    out
}

/// Parses a dataset. Record indices in errors count non-empty lines from 0.
pub fn from_jsonl(text: &str) -> Result<Dataset, GraphError> {
    let mut meta: Option<Meta> = None;
    let mut d_f: Option<usize> = None;
    let mut graphs = Vec::new();
    for (record, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let parse_err = |message: String| GraphError::Parse { record, message };
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        if value.get("meta").is_some() {
            if record != 0 {
                return Err(parse_err("header must be the first record".into()));
            }
            let m: MetaRecord = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
            d_f = Some(m.meta.d_f);
            meta = Some(m.meta);
            continue;
        }
        let rec: GraphRecord = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
        let g = rec.into_graph(d_f).map_err(parse_err)?;
        d_f.get_or_insert(g.d_f());
        if let (Some(first), Some(l)) = (graphs.first().map(Graph::label), Some(g.label())) {
            if first.is_some() != l.is_some() {
                return Err(parse_err("label presence differs from earlier records".into()));
            }
        }
        graphs.push(g);
    }
    let (name, seed) = meta.map(|m| (m.name, m.seed)).unwrap_or_default();
    Dataset::new(name, seed, d_f.unwrap_or(0), graphs)
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let mut f = fs::File::create(path)?;
    f.write_all(to_jsonl(d).as_bytes())?;
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, GraphError> {
    from_jsonl(&fs::read_to_string(path)?)
}
