//! Binary classification metrics.

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Probability at or above which a graph is assigned class 1.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_predictions(probs: &[f64], labels: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= DECISION_THRESHOLD, y == 1) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub auc: f64,
    pub sen: f64,
    pub spe: f64,
    pub confusion: Confusion,
}

impl Metrics {
    /// Metrics of class-1 probabilities against labels. Both classes must be
    /// present.
    pub fn evaluate(probs: &[f64], labels: &[u8]) -> Result<Self, HarnessError> {
        if probs.len() != labels.len() {
            return Err(HarnessError::Metric(format!("{} scores for {} labels", probs.len(), labels.len())));
        }
        let c = Confusion::from_predictions(probs, labels);
        Ok(Metrics {
            acc: ratio(c.tp + c.tn, c.total()),
            auc: auc(probs, labels)?,
            sen: ratio(c.tp, c.tp + c.fn_),
            spe: ratio(c.tn, c.tn + c.fp),
            confusion: c,
        })
    }
}

/// Area under the ROC curve as the Mann–Whitney statistic
/// `P(s+ > s-) + P(s+ = s-) / 2`, via average ranks.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64, HarnessError> {
    if scores.len() != labels.len() {
        return Err(HarnessError::Metric(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(HarnessError::Metric("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(HarnessError::Metric("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their average.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum_pos += avg * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return MeanStd { mean: 0.0, std: 0.0 };
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = if xs.len() < 2 {
            0.0
        } else {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanStd { mean, std }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} ± {:.2}", 100.0 * self.mean, 100.0 * self.std)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub acc: MeanStd,
    pub auc: MeanStd,
    pub sen: MeanStd,
    pub spe: MeanStd,
    pub runs: usize,
}

impl MetricsSummary {
    pub fn of(runs: &[Metrics]) -> Self {
        let col = |f: fn(&Metrics) -> f64| MeanStd::of(&runs.iter().map(f).collect::<Vec<_>>());
        MetricsSummary {
            acc: col(|m| m.acc),
            auc: col(|m| m.auc),
            sen: col(|m| m.sen),
            spe: col(|m| m.spe),
            runs: runs.len(),
        }
    }
}
