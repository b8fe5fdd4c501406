//! Stratified fold assignment and validation hold-out.

use rand::seq::SliceRandom;

use super::HarnessError;
use crate::seed::{self, tag};

/// Splits graph indices into `folds` test folds, stratified by label.
///
/// Each class is shuffled with its own stream and dealt round-robin, the
/// dealer continuing across classes, so every fold's class counts differ
/// from the proportional share by less than one graph.
pub fn stratified_folds(labels: &[u8], folds: usize, split_seed: u64) -> Result<Vec<Vec<usize>>, HarnessError> {
    if folds < 2 {
        return Err(HarnessError::Stratification(format!("{folds} folds requested")));
    }
    let mut out = vec![Vec::new(); folds];
    let mut dealer = 0usize;
    for class in [0u8, 1] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(HarnessError::Stratification(format!(
                "class {class} has {} graphs, fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut seed::rng(seed::derive(split_seed, &[tag::SPLIT, class as u64])));
        for i in members {
            out[dealer % folds].push(i);
            dealer += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Holds out `fraction` of `train` per class (rounded) for model selection.
/// Returns `(fit, validation)`, both sorted.
pub fn validation_split(train: &[usize], labels: &[u8], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut fit = Vec::new();
    let mut val = Vec::new();
    for class in [0u8, 1] {
        let mut members: Vec<usize> = train.iter().copied().filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut seed::rng(seed::derive(seed, &[tag::VALIDATION, class as u64])));
        let k = ((members.len() as f64 * fraction).round() as usize).min(members.len().saturating_sub(1));
        val.extend_from_slice(&members[..k]);
        fit.extend_from_slice(&members[k..]);
    }
    fit.sort_unstable();
    val.sort_unstable();
    (fit, val)
}
