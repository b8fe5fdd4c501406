//! Importance-driven augmentation: centrality-weighted edge perturbation and
//! feature-column masking.
//!
//! Both views use the same scaling rule. Importances `w` are log-scaled to
//! `s = ln w`, then mapped to `min((s_max - s) / (s_max - mean(s)) * base, cap)`,
//! so the most important item is never dropped and less important items are
//! dropped more often, never above the cap.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::CentralityScores;
use crate::graph::Graph;
use crate::seed;

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("invalid augmentation config: {0}")]
    Config(String),
    #[error("{what} has {got} entries, expected {expected}")]
    Length { what: &'static str, got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Base edge-removal rate.
    pub p_e: f64,
    /// Base feature-mask rate.
    pub p_f: f64,
    /// Cap on every probability.
    pub p_tau: f64,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        for (name, v) in [("p_e", self.p_e), ("p_f", self.p_f), ("p_tau", self.p_tau)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(AugmentError::Config(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.p_e > self.p_tau || self.p_f > self.p_tau {
            return Err(AugmentError::Config(format!(
                "base rates p_e = {}, p_f = {} must not exceed p_tau = {}",
                self.p_e, self.p_f, self.p_tau
            )));
        }
        Ok(())
    }
}

/// Both augmented views of one graph and the probabilities that produced
/// them.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedPair {
    /// Edges perturbed, features intact.
    pub view_e: Graph,
    /// Edges intact, feature columns masked.
    pub view_f: Graph,
    pub edge_probs: Vec<f64>,
    pub feat_probs: Vec<f64>,
    /// `true` keeps the column.
    pub mask: Vec<bool>,
}

/// Edge centrality `(phi(u) + phi(v)) / 2`, aligned with `g.edges()`.
pub fn edge_centrality(g: &Graph, phi: &CentralityScores) -> Vec<f64> {
    g.edges().iter().map(|e| 0.5 * (phi.scores[e.u] + phi.scores[e.v])).collect()
}

/// Shared scaling rule over log-importances. A spread below 1e-12 means all
/// items are equally important and every item gets `base`.
fn scaled_probs(s: &[f64], base: f64, cap: f64) -> Vec<f64> {
    if s.is_empty() {
        return Vec::new();
    }
    let s_max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let spread = s_max - mean;
    if spread <= 1e-12 * s_max.abs().max(1.0) {
        return vec![base.min(cap); s.len()];
    }
    s.iter().map(|&si| ((s_max - si) / spread * base).clamp(0.0, cap)).collect()
}

/// Edge-removal probabilities from strictly positive edge weights.
pub fn edge_removal_probs(weights: &[f64], p_e: f64, p_tau: f64) -> Vec<f64> {
    debug_assert!(weights.iter().all(|&w| w > 0.0), "edge weights must be positive");
    let s: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    scaled_probs(&s, p_e, p_tau)
}

/// Feature-dimension importance `w_i = sum_u |x_ui| * phi(u)`.
pub fn feature_weights(g: &Graph, phi: &CentralityScores) -> Vec<f64> {
    let mut w = vec![0.0; g.d_f()];
    for u in 0..g.n_nodes() {
        for (wi, x) in w.iter_mut().zip(g.feature_row(u)) {
            *wi += x.abs() * phi.scores[u];
        }
    }
    w
}

/// Feature-mask probabilities. Dimensions with zero weight have no
/// logarithm: they are scored one below the smallest positive log-weight
/// and always masked at the cap.
pub fn feature_mask_probs(weights: &[f64], p_f: f64, p_tau: f64) -> Vec<f64> {
    let positive_min = weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| w.ln())
        .fold(f64::INFINITY, f64::min);
    if !positive_min.is_finite() {
        // No informative dimension at all: nothing distinguishes them.
        return vec![p_f.min(p_tau); weights.len()];
    }
    let s: Vec<f64> =
        weights.iter().map(|&w| if w > 0.0 { w.ln() } else { positive_min - 1.0 }).collect();
    let mut p = scaled_probs(&s, p_f, p_tau);
    for (pi, &w) in p.iter_mut().zip(weights) {
        if w <= 0.0 {
            *pi = p_tau;
        }
    }
    p
}

/// Keeps each edge independently with probability `1 - probs[k]`.
pub fn perturb_edges(g: &Graph, probs: &[f64], seed: u64) -> Result<Graph, AugmentError> {
    if probs.len() != g.n_edges() {
        return Err(AugmentError::Length { what: "edge probabilities", got: probs.len(), expected: g.n_edges() });
    }
    let mut rng = seed::rng(seed);
    let kept = g
        .edges()
        .iter()
        .zip(probs)
        .filter(|(_, &p)| rng.random::<f64>() < 1.0 - p)
        .map(|(e, _)| *e)
        .collect();
    Ok(g.with_edges(kept))
}

/// Draws one keep-mask over feature columns, `keep_i ~ Bern(1 - probs[i])`.
pub fn sample_mask(probs: &[f64], seed: u64) -> Vec<bool> {
    let mut rng = seed::rng(seed);
    probs.iter().map(|&p| rng.random::<f64>() < 1.0 - p).collect()
}

/// Zeroes every masked column in all rows.
pub fn apply_mask(g: &Graph, mask: &[bool]) -> Result<Graph, AugmentError> {
    if mask.len() != g.d_f() {
        return Err(AugmentError::Length { what: "feature mask", got: mask.len(), expected: g.d_f() });
    }
    let mut x = g.features().to_vec();
    if g.d_f() > 0 {
        for row in x.chunks_mut(g.d_f()) {
            for (xi, &keep) in row.iter_mut().zip(mask) {
                if !keep {
                    *xi = 0.0;
                }
            }
        }
    }
    Ok(g.with_features(x))
}

/// Samples a shared column mask from `probs` and applies it.
pub fn mask_features(g: &Graph, probs: &[f64], seed: u64) -> Result<(Graph, Vec<bool>), AugmentError> {
    if probs.len() != g.d_f() {
        return Err(AugmentError::Length { what: "feature probabilities", got: probs.len(), expected: g.d_f() });
    }
    let mask = sample_mask(probs, seed);
    Ok((apply_mask(g, &mask)?, mask))
}

/// Builds the edge-perturbed and the feature-masked view of `g`. `phi` must
/// be computed on `g`. The two views draw from independent child streams of
/// `cfg.seed`.
pub fn make_views(g: &Graph, phi: &CentralityScores, cfg: &AugmentConfig) -> Result<AugmentedPair, AugmentError> {
    cfg.validate()?;
    if phi.scores.len() != g.n_nodes() {
        return Err(AugmentError::Length { what: "centrality scores", got: phi.scores.len(), expected: g.n_nodes() });
    }
    let edge_probs = edge_removal_probs(&edge_centrality(g, phi), cfg.p_e, cfg.p_tau);
    let feat_probs = feature_mask_probs(&feature_weights(g, phi), cfg.p_f, cfg.p_tau);
    let view_e = perturb_edges(g, &edge_probs, seed::derive(cfg.seed, &[seed::tag::EDGES]))?;
    let (view_f, mask) = mask_features(g, &feat_probs, seed::derive(cfg.seed, &[seed::tag::FEATURES]))?;
    Ok(AugmentedPair { view_e, view_f, edge_probs, feat_probs, mask })
}
