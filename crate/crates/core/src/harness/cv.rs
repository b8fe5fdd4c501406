//! Repeated stratified k-fold cross-validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{Metrics, MetricsSummary};
use super::split::{stratified_folds, validation_split};
use super::train::{fit, predict, FitOutcome, PreparedData};
use super::{HarnessError, TrainConfig};
use crate::graph::Dataset;
use crate::seed::{self, tag};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub metrics: Metrics,
    pub best_epoch: usize,
    pub best_val_acc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// Ordered by (repeat, fold).
    pub folds: Vec<FoldResult>,
    pub summary: MetricsSummary,
}

pub fn cross_validate(dataset: &Dataset, cfg: &TrainConfig) -> Result<CvResult, HarnessError> {
    cfg.validate()?;
    cross_validate_prepared(&PreparedData::new(dataset, cfg)?, cfg)
}

/// Runs every (repeat, fold) pair in parallel. Each run draws from its own
/// branch of the seed ladder, so results do not depend on scheduling.
pub fn cross_validate_prepared(data: &PreparedData, cfg: &TrainConfig) -> Result<CvResult, HarnessError> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for r in 0..cfg.repeats {
        let repeat_seed = seed::derive(cfg.seed, &[tag::REPEAT, r as u64]);
        let folds = stratified_folds(&data.labels, cfg.folds, repeat_seed)?;
        for (f, test) in folds.iter().enumerate() {
            jobs.push((r, f, repeat_seed, test.clone()));
        }
    }
    let folds = jobs
        .into_par_iter()
        .map(|(repeat, fold, repeat_seed, test)| {
            let fold_seed = seed::derive(repeat_seed, &[tag::FOLD, fold as u64]);
            let train: Vec<usize> = (0..data.len()).filter(|i| test.binary_search(i).is_err()).collect();
            let (fit_idx, val_idx) = validation_split(&train, &data.labels, cfg.val_fraction, fold_seed);
            let out = fit(data, &fit_idx, &val_idx, cfg, fold_seed)?;
            let probs = predict(&out.params, data, &test)?;
            Ok(FoldResult {
                repeat,
                fold,
                metrics: Metrics::evaluate(&probs, &data.labels_of(&test))?,
                best_epoch: out.best_epoch,
                best_val_acc: out.best_val_acc,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let metrics: Vec<Metrics> = folds.iter().map(|f| f.metrics).collect();
    Ok(CvResult { summary: MetricsSummary::of(&metrics), folds })
}

/// Fits one model on the whole dataset, holding out the configured
/// validation fraction for epoch selection.
pub fn fit_full(dataset: &Dataset, cfg: &TrainConfig) -> Result<FitOutcome, HarnessError> {
    cfg.validate()?;
    let data = PreparedData::new(dataset, cfg)?;
    let run_seed = seed::derive(cfg.seed, &[tag::SPLIT]);
    let all: Vec<usize> = (0..data.len()).collect();
    let (fit_idx, val_idx) = validation_split(&all, &data.labels, cfg.val_fraction, run_seed);
    fit(&data, &fit_idx, &val_idx, cfg, run_seed)
}
