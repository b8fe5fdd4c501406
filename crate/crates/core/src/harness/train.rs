//! One training run: mini-batch Adam over the joint objective with
//! per-epoch augmentation and best-validation-accuracy model selection.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::Confusion;
use super::{HarnessError, TrainConfig};
use crate::augment::make_views;
use crate::autodiff::{adam_step, OptimizerState, Tape, Tensor};
use crate::centrality::{pagerank, CentralityScores, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::graph::{Dataset, Graph};
use crate::model::{total_loss, Batch, EncoderParams, PreparedGraph};
use crate::seed::{self, tag};
use crate::topology::{topo_descriptor, TopoVector};

/// Per-graph quantities that do not change during training.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub graphs: Vec<Graph>,
    pub labels: Vec<u8>,
    pub prepared: Vec<PreparedGraph>,
    pub centrality: Vec<CentralityScores>,
    /// Descriptor of each original structure. Feature masking leaves the
    /// structure intact, so this is also the descriptor of the masked view.
    pub topo: Vec<TopoVector>,
    pub d_f: usize,
}

impl PreparedData {
    pub fn new(dataset: &Dataset, cfg: &TrainConfig) -> Result<Self, HarnessError> {
        if !dataset.is_labeled() || dataset.is_empty() {
            return Err(HarnessError::Data("training needs a non-empty labeled dataset".into()));
        }
        let graphs = dataset.graphs().to_vec();
        let labels = graphs.iter().map(|g| g.label().expect("labeled dataset")).collect();
        let prepared = graphs.iter().map(PreparedGraph::new).collect();
        let centrality: Vec<CentralityScores> =
            graphs.iter().map(|g| pagerank(g, cfg.damping, DEFAULT_TOL, DEFAULT_MAX_ITER)).collect();
        let topo = graphs.iter().zip(&centrality).map(|(g, c)| topo_descriptor(g, c, cfg.topo_k)).collect();
        Ok(PreparedData { graphs, labels, prepared, centrality, topo, d_f: dataset.d_f() })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels_of(&self, idx: &[usize]) -> Vec<u8> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub ce: f64,
    pub gcl: Option<f64>,
    pub topo: Option<f64>,
    pub val_acc: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    /// Parameters of the selected epoch.
    pub params: EncoderParams,
    /// Optimizer state after the last epoch.
    pub optimizer: OptimizerState,
    pub best_epoch: usize,
    pub best_val_acc: Option<f64>,
    pub history: Vec<EpochLog>,
}

/// Consecutive chunks of `order`; a trailing singleton joins the previous
/// chunk so every contrastive batch has at least two graphs.
pub fn make_batches(order: &[usize], batch_size: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = order.chunks(batch_size).map(<[usize]>::to_vec).collect();
    if out.len() > 1 && out.last().is_some_and(|b| b.len() == 1) {
        let tail = out.pop().expect("non-empty");
        out.last_mut().expect("non-empty").extend(tail);
    }
    out
}

struct Views {
    e: Vec<PreparedGraph>,
    f: Vec<PreparedGraph>,
    topo_e: Vec<TopoVector>,
    topo_f: Vec<TopoVector>,
}

fn build_views(data: &PreparedData, batch: &[usize], cfg: &TrainConfig, epoch_seed: u64) -> Result<Views, HarnessError> {
    let mut v = Views { e: Vec::new(), f: Vec::new(), topo_e: Vec::new(), topo_f: Vec::new() };
    for &gi in batch {
        let aug = cfg.augment_config(seed::derive(epoch_seed, &[tag::GRAPH, gi as u64]));
        let pair = make_views(&data.graphs[gi], &data.centrality[gi], &aug)?;
        let orig = &data.prepared[gi];
        let x_f = Tensor::new(orig.n_nodes(), data.d_f, pair.view_f.features().to_vec())?;
        v.f.push(PreparedGraph { x: x_f, a_hat: orig.a_hat.clone(), mask: orig.mask.clone() });
        if cfg.use_topo {
            let phi_e = pagerank(&pair.view_e, cfg.damping, DEFAULT_TOL, DEFAULT_MAX_ITER);
            v.topo_e.push(topo_descriptor(&pair.view_e, &phi_e, cfg.topo_k));
            v.topo_f.push(data.topo[gi].clone());
        }
        v.e.push(PreparedGraph::new(&pair.view_e));
    }
    Ok(v)
}

/// Probability of class 1 for each listed graph.
pub fn predict(params: &EncoderParams, data: &PreparedData, idx: &[usize]) -> Result<Vec<f64>, HarnessError> {
    idx.iter().map(|&i| params.predict(&data.prepared[i]).map_err(HarnessError::from)).collect()
}

fn accuracy(params: &EncoderParams, data: &PreparedData, idx: &[usize]) -> Result<f64, HarnessError> {
    let probs = predict(params, data, idx)?;
    let c = Confusion::from_predictions(&probs, &data.labels_of(idx));
    Ok((c.tp + c.tn) as f64 / c.total() as f64)
}

/// Trains on `train`, selecting the epoch with the best accuracy on `val`
/// (earliest on ties; the last epoch when `val` is empty).
pub fn fit(
    data: &PreparedData,
    train: &[usize],
    val: &[usize],
    cfg: &TrainConfig,
    run_seed: u64,
) -> Result<FitOutcome, HarnessError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(HarnessError::Data("empty training split".into()));
    }
    let contrastive = cfg.use_gcl || cfg.use_topo;
    if contrastive && train.len() < 2 {
        return Err(HarnessError::Data("contrastive training needs at least two graphs".into()));
    }
    let mut params = EncoderParams::init(cfg.model_config(data.d_f), seed::derive(run_seed, &[tag::INIT]))?;
    let n_batches = make_batches(train, cfg.batch_size).len() as u64;
    let mut opt = OptimizerState::new(params.tensors(), cfg.base_lr, cfg.epochs as u64 * n_batches, cfg.lr_floor);
    let loss_cfg = cfg.loss_config();
    // Augmentation without a contrastive term trains the classifier on the views.
    let ce_on_views = cfg.use_augment && !contrastive;

    let mut best: Option<(f64, usize, EncoderParams)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order = train.to_vec();
    for epoch in 0..cfg.epochs {
        let epoch_seed = seed::derive(run_seed, &[tag::EPOCH, epoch as u64]);
        order.shuffle(&mut seed::rng(seed::derive(epoch_seed, &[tag::SHUFFLE])));
        let mut sums = (0.0, 0.0, 0.0, 0.0);
        let batches = make_batches(&order, cfg.batch_size);
        for batch in &batches {
            let views = if cfg.use_augment { Some(build_views(data, batch, cfg, epoch_seed)?) } else { None };
            let labels = data.labels_of(batch);
            let (ce_graphs, ce_labels): (Vec<&PreparedGraph>, Vec<u8>) = match &views {
                Some(v) if ce_on_views => {
                    (v.e.iter().chain(&v.f).collect(), labels.iter().chain(&labels).copied().collect())
                }
                _ => (batch.iter().map(|&i| &data.prepared[i]).collect(), labels),
            };
            let b = Batch {
                ce_graphs,
                ce_labels,
                views: views.as_ref().filter(|_| cfg.use_gcl).map(|v| (v.e.iter().collect(), v.f.iter().collect())),
                topo: views.as_ref().filter(|_| cfg.use_topo).map(|v| (v.topo_e.clone(), v.topo_f.clone())),
            };
            let grads = {
                let mut tape = Tape::new();
                let bound = params.bind(&mut tape, true);
                let terms = total_loss(&mut tape, &bound, &b, &loss_cfg)?;
                let g = tape.backward(terms.total)?;
                sums.0 += tape.value(terms.total).item();
                sums.1 += terms.ce;
                sums.2 += terms.gcl.unwrap_or(0.0);
                sums.3 += terms.topo.unwrap_or(0.0);
                bound
                    .vars()
                    .iter()
                    .zip(params.tensors())
                    .map(|(&v, t)| g.get_or_zeros(v, t.rows(), t.cols()))
                    .collect::<Vec<_>>()
            };
            adam_step(params.tensors_mut(), &grads, &mut opt);
        }
        if params.tensors().iter().any(|t| t.data().iter().any(|x| !x.is_finite())) {
            return Err(HarnessError::Data(format!("parameters diverged in epoch {epoch}")));
        }
        let nb = batches.len() as f64;
        let val_acc = if val.is_empty() { None } else { Some(accuracy(&params, data, val)?) };
        history.push(EpochLog {
            epoch,
            loss: sums.0 / nb,
            ce: sums.1 / nb,
            gcl: cfg.use_gcl.then_some(sums.2 / nb),
            topo: cfg.use_topo.then_some(sums.3 / nb),
            val_acc,
        });
        let score = val_acc.unwrap_or(f64::NEG_INFINITY);
        match &best {
            Some((s, _, _)) if score <= *s && val_acc.is_some() => {}
            _ => best = Some((score, epoch, params.clone())),
        }
    }
    let (_, best_epoch, best_params) = best.expect("at least one epoch");
    Ok(FitOutcome {
        best_val_acc: history[best_epoch].val_acc,
        params: best_params,
        optimizer: opt,
        best_epoch,
        history,
    })
}
