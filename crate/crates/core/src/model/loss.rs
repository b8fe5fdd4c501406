//! Contrastive and classification objectives.

use serde::{Deserialize, Serialize};

use super::{classify, encode, Bound, ModelError, PreparedGraph};
use crate::autodiff::{Tape, Tensor, Var};
use crate::topology::TopoVector;

/// Predicted probabilities are clamped into `[PROB_CLAMP, 1 - PROB_CLAMP]`
/// before taking logs.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Temperature of both contrastive terms.
    pub tau: f64,
    /// Weight of the embedding contrastive term.
    pub lambda1: f64,
    /// Weight of the topological contrastive term.
    pub lambda2: f64,
    /// Use the symmetric NT-Xent form instead of the default one-sided form.
    pub symmetric: bool,
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.tau > 0.0) {
            return Err(ModelError::Config(format!("temperature {} must be > 0", self.tau)));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(ModelError::Config("loss weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// Contrastive loss between the rows of `anchors_e` and `anchors_f` (both
/// `T x d`, aligned by graph).
///
/// Default form, per graph `i`:
/// `-log( exp(s(E_i, F_i)/tau) / sum_{k != i} exp(s(F_i, F_k)/tau) )`,
/// averaged over the batch, with `s` the cosine similarity (0 against a zero
/// vector). The symmetric variant averages the two directions of the
/// standard NT-Xent cross-view softmax, positives included.
pub fn info_nce(tape: &mut Tape, anchors_e: Var, anchors_f: Var, tau: f64, symmetric: bool) -> Result<Var, ModelError> {
    let t = tape.value(anchors_e).rows();
    if t < 2 {
        return Err(ModelError::Config(format!("contrastive loss needs a batch of at least 2, got {t}")));
    }
    if tape.value(anchors_f).shape() != tape.value(anchors_e).shape() {
        return Err(ModelError::Config("view embeddings are not aligned".into()));
    }
    let e = tape.l2_normalize_rows(anchors_e);
    let f = tape.l2_normalize_rows(anchors_f);
    if symmetric {
        let a = one_direction_nt_xent(tape, e, f, tau, t)?;
        let b = one_direction_nt_xent(tape, f, e, tau, t)?;
        let s = tape.add(a, b)?;
        return Ok(tape.scale(s, 0.5));
    }
    let ef = tape.mul(e, f)?;
    let pos = tape.row_sums(ef);
    let pos = tape.scale(pos, 1.0 / tau);

    let ft = tape.transpose(f);
    let sim = tape.matmul(f, ft)?;
    let sim = tape.scale(sim, 1.0 / tau);
    // Cosines are at most 1; shifting by 1/tau keeps exp() bounded.
    let shifted = tape.add_scalar(sim, -1.0 / tau);
    let ex = tape.exp(shifted);
    let mut off_diag = Tensor::filled(t, t, 1.0);
    for i in 0..t {
        off_diag.set(i, i, 0.0);
    }
    let off_diag = tape.constant(off_diag);
    let negs = tape.mul(ex, off_diag)?;
    let den = tape.row_sums(negs);
    let log_den = tape.log(den);
    let log_den = tape.add_scalar(log_den, 1.0 / tau);

    let per_graph = tape.sub(log_den, pos)?;
    let total = tape.sum(per_graph);
    Ok(tape.scale(total, 1.0 / t as f64))
}

fn one_direction_nt_xent(tape: &mut Tape, a: Var, b: Var, tau: f64, t: usize) -> Result<Var, ModelError> {
    let bt = tape.transpose(b);
    let sim = tape.matmul(a, bt)?;
    let sim = tape.scale(sim, 1.0 / tau);
    let p = tape.softmax_rows(sim);
    let eye = tape.constant(Tensor::identity(t));
    let diag = tape.mul(p, eye)?;
    let pos = tape.row_sums(diag);
    let pos = tape.clamp(pos, PROB_CLAMP, 1.0);
    let logp = tape.log(pos);
    let s = tape.sum(logp);
    Ok(tape.scale(s, -1.0 / t as f64))
}

/// The contrastive form of [`info_nce`] over fixed topological descriptors.
/// Descriptors carry no parameters, so this is a plain number.
pub fn topo_nce(to_e: &[TopoVector], to_f: &[TopoVector], tau: f64, symmetric: bool) -> Result<f64, ModelError> {
    if to_e.len() != to_f.len() {
        return Err(ModelError::Config("descriptor lists are not aligned".into()));
    }
    let rows = |v: &[TopoVector]| Tensor::from_rows(&v.iter().map(|t| t.values.clone()).collect::<Vec<_>>());
    let mut tape = Tape::new();
    let e = tape.constant(rows(to_e)?);
    let f = tape.constant(rows(to_f)?);
    let l = info_nce(&mut tape, e, f, tau, symmetric)?;
    Ok(tape.value(l).item())
}

/// Mean binary cross-entropy of `sigmoid(logits)` (`T x 1`) against labels.
pub fn cross_entropy(tape: &mut Tape, logits: Var, labels: &[u8]) -> Result<Var, ModelError> {
    let t = labels.len();
    if tape.value(logits).shape() != [t, 1] {
        return Err(ModelError::Config(format!(
            "{} logits for {t} labels",
            tape.value(logits).rows()
        )));
    }
    let y = Tensor::column(labels.iter().map(|&l| f64::from(l)).collect());
    let not_y = y.map(|v| 1.0 - v);
    let p = tape.sigmoid(logits);
    let p = tape.clamp(p, PROB_CLAMP, 1.0 - PROB_CLAMP);
    let log_p = tape.log(p);
    let q = tape.scale(p, -1.0);
    let q = tape.add_scalar(q, 1.0);
    let log_q = tape.log(q);
    let y = tape.constant(y);
    let not_y = tape.constant(not_y);
    let a = tape.mul(log_p, y)?;
    let b = tape.mul(log_q, not_y)?;
    let s = tape.add(a, b)?;
    let s = tape.sum(s);
    Ok(tape.scale(s, -1.0 / t as f64))
}

/// One mini-batch of the joint objective.
pub struct Batch<'a> {
    /// Graphs whose predictions enter the cross-entropy term.
    pub ce_graphs: Vec<&'a PreparedGraph>,
    pub ce_labels: Vec<u8>,
    /// Edge-perturbed and feature-masked views, aligned by graph.
    pub views: Option<(Vec<&'a PreparedGraph>, Vec<&'a PreparedGraph>)>,
    /// Descriptors of the two views, aligned by graph.
    pub topo: Option<(Vec<TopoVector>, Vec<TopoVector>)>,
}

#[derive(Clone, Copy, Debug)]
pub struct LossTerms {
    pub total: Var,
    pub ce: f64,
    pub gcl: Option<f64>,
    pub topo: Option<f64>,
}

fn embed_all(tape: &mut Tape, b: &Bound, graphs: &[&PreparedGraph]) -> Result<Var, ModelError> {
    let rows = graphs.iter().map(|g| encode(tape, b, g).map(|e| e.embedding)).collect::<Result<Vec<_>, _>>()?;
    Ok(tape.concat_rows(&rows)?)
}

/// `CE + lambda1 * L_G + lambda2 * L_Topo`, each contrastive term present
/// only when the batch carries its inputs.
pub fn total_loss(tape: &mut Tape, b: &Bound, batch: &Batch, cfg: &LossConfig) -> Result<LossTerms, ModelError> {
    cfg.validate()?;
    let mut logits = Vec::with_capacity(batch.ce_graphs.len());
    for g in &batch.ce_graphs {
        let enc = encode(tape, b, g)?;
        logits.push(classify(tape, b, enc.embedding)?);
    }
    let logits = tape.concat_rows(&logits)?;
    let ce = cross_entropy(tape, logits, &batch.ce_labels)?;
    let mut terms = LossTerms { total: ce, ce: tape.value(ce).item(), gcl: None, topo: None };
    if let Some((ve, vf)) = &batch.views {
        let he = embed_all(tape, b, ve)?;
        let hf = embed_all(tape, b, vf)?;
        let l = info_nce(tape, he, hf, cfg.tau, cfg.symmetric)?;
        terms.gcl = Some(tape.value(l).item());
        let weighted = tape.scale(l, cfg.lambda1);
        terms.total = tape.add(terms.total, weighted)?;
    }
    if let Some((te, tf)) = &batch.topo {
        let l = topo_nce(te, tf, cfg.tau, cfg.symmetric)?;
        terms.topo = Some(l);
        let weighted = tape.constant(Tensor::scalar(cfg.lambda2 * l));
        terms.total = tape.add(terms.total, weighted)?;
    }
    Ok(terms)
}
