//! Training and evaluation orchestration: configuration, cross-validation,
//! metrics, sweeps, ablation, reports and model files.

mod config;
mod cv;
mod metrics;
mod report;
mod split;
mod sweep;
mod train;

pub use config::TrainConfig;
pub use cv::{cross_validate, cross_validate_prepared, fit_full, CvResult, FoldResult};
pub use metrics::{auc, Confusion, MeanStd, Metrics, MetricsSummary, DECISION_THRESHOLD};
pub use report::{Report, ReportRow};
pub use split::{stratified_folds, validation_split};
pub use sweep::{ablate, resparsify, sweep_layers, sweep_lambdas, sweep_sparsity, ABLATION_ROWS};
pub use train::{fit, make_batches, predict, EpochLog, FitOutcome, PreparedData};

use std::path::Path;

use thiserror::Error;

use crate::augment::AugmentError;
use crate::autodiff::{AutodiffError, Checkpoint};
use crate::graph::{Dataset, GraphError};
use crate::model::{EncoderParams, ModelError, PreparedGraph, Readout};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("metric: {0}")]
    Metric(String),
    #[error("stratification: {0}")]
    Stratification(String),
    #[error("data: {0}")]
    Data(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

/// Writes trained parameters with the configuration as metadata.
pub fn save_model(path: impl AsRef<Path>, cfg: &TrainConfig, fit: &FitOutcome) -> Result<(), HarnessError> {
    fit.params.to_checkpoint(cfg.to_toml(), Some(fit.optimizer.clone())).save(path)?;
    Ok(())
}

/// Reads a model written by [`save_model`].
pub fn load_model(path: impl AsRef<Path>) -> Result<(TrainConfig, EncoderParams), HarnessError> {
    model_from_checkpoint(Checkpoint::load(path)?)
}

pub fn model_from_checkpoint(ck: Checkpoint) -> Result<(TrainConfig, EncoderParams), HarnessError> {
    let cfg = TrainConfig::from_toml(&ck.meta)?;
    let d_f = ck
        .tensors
        .iter()
        .find(|(n, _)| n == "in.w")
        .map(|(_, t)| t.rows())
        .ok_or_else(|| HarnessError::Data("checkpoint has no input projection".into()))?;
    let params = EncoderParams::from_named(cfg.model_config(d_f), ck.tensors)?;
    Ok((cfg, params))
}

fn check_dim(params: &EncoderParams, dataset: &Dataset) -> Result<(), HarnessError> {
    if dataset.d_f() != params.config.d_f {
        return Err(ModelError::FeatureDim { got: dataset.d_f(), expected: params.config.d_f }.into());
    }
    Ok(())
}

/// Class-1 probability of every graph.
pub fn predict_dataset(params: &EncoderParams, dataset: &Dataset) -> Result<Vec<f64>, HarnessError> {
    check_dim(params, dataset)?;
    dataset.graphs().iter().map(|g| Ok(params.predict(&PreparedGraph::new(g))?)).collect()
}

/// Attention-readout weight of every node of every graph, as
/// `(node, score)` in node order.
pub fn roi_scores(params: &EncoderParams, dataset: &Dataset) -> Result<Vec<Vec<(usize, f64)>>, HarnessError> {
    if params.config.readout != Readout::Attention {
        return Err(HarnessError::Config("node scores need a model with attention readout".into()));
    }
    check_dim(params, dataset)?;
    dataset
        .graphs()
        .iter()
        .map(|g| {
            let emb = params.embed(&PreparedGraph::new(g))?;
            Ok(emb.scores.expect("attention readout yields scores").into_iter().enumerate().collect())
        })
        .collect()
}
