//! Training configuration, read from flat `key = value` TOML.

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::augment::AugmentConfig;
use crate::model::{LossConfig, ModelConfig, Readout};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Sparsity ratio used when (re)binarizing correlation features.
    pub rho: f64,
    pub p_e: f64,
    pub p_f: f64,
    pub p_tau: f64,
    pub damping: f64,
    pub layers: usize,
    pub heads: usize,
    pub d_h: usize,
    pub tau: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub lr_floor: f64,
    pub seed: u64,
    pub folds: usize,
    pub repeats: usize,
    /// Fraction of each training split held out for model selection.
    pub val_fraction: f64,
    /// Number of persistences kept in a topological descriptor.
    pub topo_k: usize,
    pub readout: Readout,
    pub symmetric_nce: bool,
    pub use_augment: bool,
    pub use_ddformer: bool,
    pub use_gcl: bool,
    pub use_topo: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rho: 0.3,
            p_e: 0.1,
            p_f: 0.1,
            p_tau: 0.1,
            damping: crate::centrality::DEFAULT_DAMPING,
            layers: 2,
            heads: 4,
            d_h: 16,
            tau: 0.5,
            lambda1: 0.1,
            lambda2: 0.01,
            epochs: 50,
            batch_size: 32,
            base_lr: 1e-3,
            lr_floor: 0.0,
            seed: 0,
            folds: 5,
            repeats: 5,
            val_fraction: 0.2,
            topo_k: crate::topology::DEFAULT_K,
            readout: Readout::Mean,
            symmetric_nce: false,
            use_augment: true,
            use_ddformer: true,
            use_gcl: true,
            use_topo: true,
        }
    }
}

impl TrainConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: TrainConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        for (name, v) in [("rho", self.rho), ("p_e", self.p_e), ("p_f", self.p_f), ("p_tau", self.p_tau), ("val_fraction", self.val_fraction)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.rho == 0.0 {
            return bad("rho must be > 0".into());
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return bad(format!("damping = {} outside (0, 1)", self.damping));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.folds == 0 || self.repeats == 0 {
            return bad("epochs, batch_size, folds and repeats must be >= 1".into());
        }
        if self.folds < 2 {
            return bad("cross-validation needs at least 2 folds".into());
        }
        if !(self.base_lr > 0.0) || self.lr_floor < 0.0 || self.lr_floor > self.base_lr {
            return bad(format!("learning rates base = {}, floor = {} are invalid", self.base_lr, self.lr_floor));
        }
        if (self.use_gcl || self.use_topo) && !self.use_augment {
            return bad("contrastive terms need augmented views (use_augment = true)".into());
        }
        if (self.use_gcl || self.use_topo) && self.batch_size < 2 {
            return bad("contrastive terms need batch_size >= 2".into());
        }
        self.augment_config(0).validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.model_config(1).validate()?;
        self.loss_config().validate()?;
        Ok(())
    }

    pub fn model_config(&self, d_f: usize) -> ModelConfig {
        ModelConfig {
            d_f,
            d_h: self.d_h,
            heads: self.heads,
            layers: self.layers,
            dual_domain: self.use_ddformer,
            readout: self.readout,
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig { tau: self.tau, lambda1: self.lambda1, lambda2: self.lambda2, symmetric: self.symmetric_nce }
    }

    pub fn augment_config(&self, seed: u64) -> AugmentConfig {
        AugmentConfig { p_e: self.p_e, p_f: self.p_f, p_tau: self.p_tau, seed }
    }
}
