//! Dual-domain graph encoder (graph convolution + Gaussian-masked
//! multi-head attention with a learned fusion gate), the binary classifier
//! head and the training objective.

mod encoder;
mod loss;
mod prepare;

pub use encoder::{attention_heads, classify, encode, fuse, gcn_branch, gmha_branch, Bound, Encoded};
pub use loss::{cross_entropy, info_nce, topo_nce, total_loss, Batch, LossConfig, LossTerms, PROB_CLAMP};
pub use prepare::{gaussian_mask, normalized_adjacency, GaussianMask, PreparedGraph};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::{xavier_init, AutodiffError, Checkpoint, Tape, Tensor};
use crate::seed;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
    #[error("model configuration: {0}")]
    Config(String),
    #[error("input has {got} feature columns, model expects {expected}")]
    FeatureDim { got: usize, expected: usize },
    #[error("missing parameter {0}")]
    MissingParam(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    Mean,
    /// Softmax-weighted node pooling; exposes per-node scores.
    Attention,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_f: usize,
    pub d_h: usize,
    pub heads: usize,
    pub layers: usize,
    /// Dual-domain blocks; otherwise each layer is the convolution branch only.
    pub dual_domain: bool,
    pub readout: Readout,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.layers == 0 {
            return Err(ModelError::Config("at least one encoder layer is required".into()));
        }
        if self.d_h == 0 || self.heads == 0 || self.d_h % self.heads != 0 {
            return Err(ModelError::Config(format!(
                "hidden size {} must be a positive multiple of the head count {}",
                self.d_h, self.heads
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_h / self.heads
    }
}

/// Every learnable tensor, by name, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    pub config: ModelConfig,
    names: Vec<String>,
    tensors: Vec<Tensor>,
    index: HashMap<String, usize>,
}

/// Expansion factor of the two-layer feed-forward blocks.
pub const FFN_EXPANSION: usize = 2;

enum Init {
    Xavier,
    Zeros,
    Ones,
}

fn layout(c: &ModelConfig) -> Vec<(String, usize, usize, Init)> {
    let (d_f, d_h) = (c.d_f, c.d_h);
    let d_ff = FFN_EXPANSION * d_h;
    let mut spec = vec![
        ("in.w".to_string(), d_f, d_h, Init::Xavier),
        ("in.b".to_string(), 1, d_h, Init::Zeros),
        ("in.ln_gain".to_string(), 1, d_h, Init::Ones),
        ("in.ln_bias".to_string(), 1, d_h, Init::Zeros),
    ];
    let ffn = |p: &str| {
        vec![
            (format!("{p}.ffn.w1"), d_h, d_ff, Init::Xavier),
            (format!("{p}.ffn.b1"), 1, d_ff, Init::Zeros),
            (format!("{p}.ffn.w2"), d_ff, d_h, Init::Xavier),
            (format!("{p}.ffn.b2"), 1, d_h, Init::Zeros),
        ]
    };
    for l in 0..c.layers {
        spec.push((format!("l{l}.gcn.w"), d_h, d_h, Init::Xavier));
        spec.extend(ffn(&format!("l{l}.gcn")));
        if c.dual_domain {
            for h in 0..c.heads {
                for role in ["q", "k", "v"] {
                    spec.push((format!("l{l}.att.h{h}.{role}"), d_h, c.head_dim(), Init::Xavier));
                }
            }
            spec.extend(ffn(&format!("l{l}.att")));
            spec.push((format!("l{l}.gate.w"), d_h, d_h, Init::Xavier));
            spec.push((format!("l{l}.gate.b"), 1, d_h, Init::Zeros));
        }
    }
    if c.readout == Readout::Attention {
        spec.push(("readout.w".to_string(), d_h, 1, Init::Xavier));
    }
    spec.push(("cls.w".to_string(), d_h, 1, Init::Xavier));
    spec.push(("cls.b".to_string(), 1, 1, Init::Zeros));
    spec
}

impl EncoderParams {
    /// Xavier-initialized weights, zero biases, unit layer-norm gain.
    pub fn init(config: ModelConfig, init_seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (k, (name, r, c, init)) in layout(&config).into_iter().enumerate() {
            let t = match init {
                Init::Xavier => xavier_init(r, c, seed::derive(init_seed, &[seed::tag::INIT, k as u64])),
                Init::Zeros => Tensor::zeros(r, c),
                Init::Ones => Tensor::filled(r, c, 1.0),
            };
            names.push(name);
            tensors.push(t);
        }
        Ok(Self::from_parts(config, names, tensors))
    }

    fn from_parts(config: ModelConfig, names: Vec<String>, tensors: Vec<Tensor>) -> Self {
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        EncoderParams { config, names, tensors, index }
    }

    /// Rebuilds parameters from named tensors, checking the layout.
    pub fn from_named(config: ModelConfig, named: Vec<(String, Tensor)>) -> Result<Self, ModelError> {
        config.validate()?;
        let expected = layout(&config);
        let mut by_name: HashMap<String, Tensor> = named.into_iter().collect();
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (name, r, c, _) in expected {
            let t = by_name.remove(&name).ok_or_else(|| ModelError::MissingParam(name.clone()))?;
            if t.shape() != [r, c] {
                return Err(ModelError::Config(format!("parameter {name} has shape {:?}, expected [{r}, {c}]", t.shape())));
            }
            names.push(name);
            tensors.push(t);
        }
        if let Some(extra) = by_name.keys().min() {
            return Err(ModelError::Config(format!("unexpected parameter {extra}")));
        }
        Ok(Self::from_parts(config, names, tensors))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index.get(name).map(|&i| &mut self.tensors[i])
    }

    pub fn named(&self) -> Vec<(String, Tensor)> {
        self.names.iter().cloned().zip(self.tensors.iter().cloned()).collect()
    }

    pub fn n_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.data().len()).sum()
    }

    /// Puts every parameter on `tape`, tracked for gradients or not.
    pub fn bind<'p>(&'p self, tape: &mut Tape, trainable: bool) -> Bound<'p> {
        let vars = self
            .tensors
            .iter()
            .map(|t| if trainable { tape.param(t.clone()) } else { tape.constant(t.clone()) })
            .collect();
        Bound::new(self, vars)
    }

    pub fn to_checkpoint(&self, meta: String, optimizer: Option<crate::autodiff::OptimizerState>) -> Checkpoint {
        Checkpoint { meta, tensors: self.named(), optimizer }
    }

    /// Forward pass without gradient tracking.
    pub fn embed(&self, g: &PreparedGraph) -> Result<GraphEmbedding, ModelError> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape, false);
        let enc = encode(&mut tape, &bound, g)?;
        let logit = classify(&mut tape, &bound, enc.embedding)?;
        Ok(GraphEmbedding {
            h_g: tape.value(enc.embedding).data().to_vec(),
            nodes: tape.value(enc.nodes).clone(),
            scores: enc.scores.map(|s| tape.value(s).data().to_vec()),
            logit: tape.value(logit).item(),
        })
    }

    /// Probability of class 1.
    pub fn predict(&self, g: &PreparedGraph) -> Result<f64, ModelError> {
        Ok(crate::autodiff::sigmoid(self.embed(g)?.logit))
    }
}

/// Result of encoding one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphEmbedding {
    pub h_g: Vec<f64>,
    /// Final node representations, `n x d_h`.
    pub nodes: Tensor,
    /// Attention-readout weights over nodes (sum to 1), when enabled.
    pub scores: Option<Vec<f64>>,
    pub logit: f64,
}
