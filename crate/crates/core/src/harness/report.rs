//! Result tables: line-delimited JSON records and an aligned text summary.

use serde_json::{json, Map, Value};

use super::cv::CvResult;
use super::metrics::{MeanStd, MetricsSummary};

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: String,
    /// Row-specific settings (sweep coordinates, ablation flags, ...).
    pub settings: Vec<(String, Value)>,
    pub summary: MetricsSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub kind: String,
    pub rows: Vec<ReportRow>,
}

fn put(obj: &mut Map<String, Value>, key: &str, m: MeanStd) {
    obj.insert(format!("{key}_mean"), json!(m.mean));
    obj.insert(format!("{key}_std"), json!(m.std));
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn new(kind: impl Into<String>) -> Self {
        Report { kind: kind.into(), rows: Vec::new() }
    }

    /// Per-fold rows followed by an `all` row with the mean and sample std.
    pub fn from_cv(kind: impl Into<String>, cv: &CvResult) -> Self {
        let mut r = Report::new(kind);
        for f in &cv.folds {
            r.rows.push(ReportRow {
                name: format!("r{}f{}", f.repeat, f.fold),
                settings: vec![
                    ("repeat".into(), json!(f.repeat)),
                    ("fold".into(), json!(f.fold)),
                    ("best_epoch".into(), json!(f.best_epoch)),
                    ("tp".into(), json!(f.metrics.confusion.tp)),
                    ("tn".into(), json!(f.metrics.confusion.tn)),
                    ("fp".into(), json!(f.metrics.confusion.fp)),
                    ("fn".into(), json!(f.metrics.confusion.fn_)),
                ],
                summary: MetricsSummary::of(&[f.metrics]),
            });
        }
        r.rows.push(ReportRow { name: "all".into(), settings: Vec::new(), summary: cv.summary });
        r
    }

    pub fn records(&self) -> Vec<Value> {
        self.rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                obj.insert("kind".into(), json!(self.kind));
                obj.insert("name".into(), json!(row.name));
                for (k, v) in &row.settings {
                    obj.insert(k.clone(), v.clone());
                }
                put(&mut obj, "acc", row.summary.acc);
                put(&mut obj, "auc", row.summary.auc);
                put(&mut obj, "sen", row.summary.sen);
                put(&mut obj, "spe", row.summary.spe);
                obj.insert("runs".into(), json!(row.summary.runs));
                Value::Object(obj)
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        self.records().iter().map(|r| format!("{r}\n")).collect()
    }

    /// Aligned table with metrics in percent as `mean ± std`.
    pub fn to_table(&self) -> String {
        let mut keys: Vec<&str> = Vec::new();
        for row in &self.rows {
            for (k, _) in &row.settings {
                if !keys.contains(&k.as_str()) {
                    keys.push(k);
                }
            }
        }
        let mut header: Vec<String> = vec!["name".into()];
        header.extend(keys.iter().map(|k| k.to_string()));
        header.extend(["ACC (%)", "AUC (%)", "SEN (%)", "SPE (%)"].map(String::from));
        let mut lines = vec![header];
        for row in &self.rows {
            let mut line = vec![row.name.clone()];
            for k in &keys {
                line.push(row.settings.iter().find(|(rk, _)| rk == k).map(|(_, v)| cell(v)).unwrap_or_default());
            }
            let s = &row.summary;
            line.extend([s.acc, s.auc, s.sen, s.spe].map(|m| m.to_string()));
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("# {}\n", self.kind);
        for (i, l) in lines.iter().enumerate() {
            let cells: Vec<String> = l.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if i == 0 {
                out.push_str(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().join("  "));
                out.push('\n');
            }
        }
        out
    }
}
