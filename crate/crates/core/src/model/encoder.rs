use super::{EncoderParams, ModelError, PreparedGraph, Readout};
use crate::autodiff::{Tape, Tensor, Var};

/// Parameters placed on a tape.
pub struct Bound<'p> {
    params: &'p EncoderParams,
    vars: Vec<Var>,
}

impl<'p> Bound<'p> {
    pub(super) fn new(params: &'p EncoderParams, vars: Vec<Var>) -> Self {
        Bound { params, vars }
    }

    pub fn var(&self, name: &str) -> Result<Var, ModelError> {
        self.params
            .index
            .get(name)
            .map(|&i| self.vars[i])
            .ok_or_else(|| ModelError::MissingParam(name.to_string()))
    }

    /// Tape handles in parameter order.
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn params(&self) -> &EncoderParams {
        self.params
    }
}

/// `x W + b`.
fn linear(tape: &mut Tape, b: &Bound, x: Var, w: &str, bias: &str) -> Result<Var, ModelError> {
    let xw = tape.matmul(x, b.var(w)?)?;
    Ok(tape.add(xw, b.var(bias)?)?)
}

/// Two-layer feed-forward block with ReLU between.
fn ffn(tape: &mut Tape, b: &Bound, prefix: &str, x: Var) -> Result<Var, ModelError> {
    let h = linear(tape, b, x, &format!("{prefix}.ffn.w1"), &format!("{prefix}.ffn.b1"))?;
    let h = tape.relu(h);
    linear(tape, b, h, &format!("{prefix}.ffn.w2"), &format!("{prefix}.ffn.b2"))
}

/// `FFN(relu(A_hat H W))` for layer `layer`.
pub fn gcn_branch(tape: &mut Tape, b: &Bound, layer: usize, h: Var, a_hat: Var) -> Result<Var, ModelError> {
    let hw = tape.matmul(h, b.var(&format!("l{layer}.gcn.w"))?)?;
    let agg = tape.matmul(a_hat, hw)?;
    let act = tape.relu(agg);
    ffn(tape, b, &format!("l{layer}.gcn"), act)
}

/// Concatenated outputs of every attention head before the feed-forward
/// block. Per head: `softmax((H Wq)(H Wk)^T / sqrt(d) ⊙ M) (H Wv)` with
/// unreachable pairs left out of the softmax.
pub fn attention_heads(
    tape: &mut Tape,
    b: &Bound,
    layer: usize,
    h: Var,
    mask: &Tensor,
    exclude: &[bool],
) -> Result<Var, ModelError> {
    let cfg = b.params().config;
    let inv_sqrt_d = 1.0 / (cfg.head_dim() as f64).sqrt();
    let mut outs = Vec::with_capacity(cfg.heads);
    for head in 0..cfg.heads {
        let p = format!("l{layer}.att.h{head}");
        let q = tape.matmul(h, b.var(&format!("{p}.q"))?)?;
        let k = tape.matmul(h, b.var(&format!("{p}.k"))?)?;
        let v = tape.matmul(h, b.var(&format!("{p}.v"))?)?;
        let kt = tape.transpose(k);
        let s = tape.matmul(q, kt)?;
        let s = tape.scale(s, inv_sqrt_d);
        let attn = tape.masked_softmax_rows(s, mask, exclude)?;
        outs.push(tape.matmul(attn, v)?);
    }
    Ok(tape.concat_cols(&outs)?)
}

/// Gaussian-masked multi-head attention followed by its feed-forward block.
pub fn gmha_branch(
    tape: &mut Tape,
    b: &Bound,
    layer: usize,
    h: Var,
    mask: &Tensor,
    exclude: &[bool],
) -> Result<Var, ModelError> {
    let heads = attention_heads(tape, b, layer, h, mask, exclude)?;
    ffn(tape, b, &format!("l{layer}.att"), heads)
}

/// `alpha ⊙ H_gcn + (1 - alpha) ⊙ H_gt` with
/// `alpha = sigmoid(mean_rows(H_prev) W + b)` broadcast over nodes.
pub fn fuse(tape: &mut Tape, b: &Bound, layer: usize, h_gcn: Var, h_gt: Var, h_prev: Var) -> Result<Var, ModelError> {
    let pooled = tape.row_mean(h_prev);
    let logits = linear(tape, b, pooled, &format!("l{layer}.gate.w"), &format!("l{layer}.gate.b"))?;
    let alpha = tape.sigmoid(logits);
    let diff = tape.sub(h_gcn, h_gt)?;
    let gated = tape.mul(diff, alpha)?;
    Ok(tape.add(h_gt, gated)?)
}

/// Handles produced by [`encode`].
#[derive(Clone, Copy, Debug)]
pub struct Encoded {
    /// Graph embedding, `1 x d_h`.
    pub embedding: Var,
    /// Final node representations, `n x d_h`.
    pub nodes: Var,
    /// Attention-readout weights, `1 x n`.
    pub scores: Option<Var>,
}

/// Full encoder: `H0 = LayerNorm(X W + b)`, then `layers` blocks, then the
/// readout.
pub fn encode(tape: &mut Tape, b: &Bound, g: &PreparedGraph) -> Result<Encoded, ModelError> {
    let cfg = b.params().config;
    if g.x.cols() != cfg.d_f {
        return Err(ModelError::FeatureDim { got: g.x.cols(), expected: cfg.d_f });
    }
    let x = tape.constant(g.x.clone());
    let a_hat = tape.constant(g.a_hat.clone());
    let h = linear(tape, b, x, "in.w", "in.b")?;
    let h = tape.layer_norm_rows(h);
    let h = tape.mul(h, b.var("in.ln_gain")?)?;
    let mut h = tape.add(h, b.var("in.ln_bias")?)?;
    for layer in 0..cfg.layers {
        let h_gcn = gcn_branch(tape, b, layer, h, a_hat)?;
        h = if cfg.dual_domain {
            let h_gt = gmha_branch(tape, b, layer, h, &g.mask.weights, &g.mask.exclude)?;
            fuse(tape, b, layer, h_gcn, h_gt, h)?
        } else {
            h_gcn
        };
    }
    match cfg.readout {
        Readout::Mean => Ok(Encoded { embedding: tape.row_mean(h), nodes: h, scores: None }),
        Readout::Attention => {
            let logits = tape.matmul(h, b.var("readout.w")?)?;
            let logits = tape.transpose(logits);
            let scores = tape.softmax_rows(logits);
            let embedding = tape.matmul(scores, h)?;
            Ok(Encoded { embedding, nodes: h, scores: Some(scores) })
        }
    }
}

/// Classifier logit, `1 x 1`.
pub fn classify(tape: &mut Tape, b: &Bound, embedding: Var) -> Result<Var, ModelError> {
    linear(tape, b, embedding, "cls.w", "cls.b")
}
