//! Dense reverse-mode differentiation, initialization, optimization and
//! checkpointing.

mod checkpoint;
mod optim;
mod tape;
mod tensor;

pub use checkpoint::{Checkpoint, MAGIC, VERSION};
pub use optim::{adam_step, cosine_lr, OptimizerState, BETA1, BETA2, EPS};
pub use tape::{sigmoid, Gradients, Tape, Var, LAYER_NORM_EPS};
pub use tensor::{xavier_init, Tensor};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape { op: &'static str, left: Vec<usize>, right: Vec<usize> },
    #[error("{len} values do not fill shape {shape:?}")]
    Data { shape: Vec<usize>, len: usize },
    #[error("row index {index} out of range for shape {shape:?}")]
    Index { index: usize, shape: Vec<usize> },
    #[error("{0} needs at least one input")]
    Empty(&'static str),
    #[error("backward needs a 1 x 1 output, got {0:?}")]
    NotScalar(Vec<usize>),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
