//! Adam with bias correction and a cosine-annealed learning rate.

use super::Tensor;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

/// `floor + 0.5 (base - floor)(1 + cos(pi * step / period))`, held at
/// `floor` past the end of the period.
pub fn cosine_lr(step: u64, period: u64, base: f64, floor: f64) -> f64 {
    if period == 0 {
        return base;
    }
    let t = step.min(period) as f64 / period as f64;
    floor + 0.5 * (base - floor) * (1.0 + (std::f64::consts::PI * t).cos())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub first_moment: Vec<Tensor>,
    pub second_moment: Vec<Tensor>,
    /// Number of updates applied so far.
    pub step: u64,
    pub base_lr: f64,
    pub period: u64,
    pub floor_lr: f64,
}

impl OptimizerState {
    pub fn new(params: &[Tensor], base_lr: f64, period: u64, floor_lr: f64) -> Self {
        let zeros: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect();
        OptimizerState {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step: 0,
            base_lr,
            period,
            floor_lr,
        }
    }

    /// Learning rate used by the next update.
    pub fn current_lr(&self) -> f64 {
        cosine_lr(self.step, self.period, self.base_lr, self.floor_lr)
    }
}

/// One Adam update of every parameter in place. The learning rate comes
/// from the cosine schedule at the current step count.
pub fn adam_step(params: &mut [Tensor], grads: &[Tensor], state: &mut OptimizerState) {
    assert_eq!(params.len(), grads.len(), "one gradient per parameter");
    assert_eq!(params.len(), state.first_moment.len(), "optimizer state misaligned");
    let lr = state.current_lr();
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        assert_eq!(p.shape(), g.shape(), "gradient shape for parameter {k}");
        let m = state.first_moment[k].data_mut();
        let v = state.second_moment[k].data_mut();
        for (((x, &gi), mi), vi) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = BETA1 * *mi + (1.0 - BETA1) * gi;
            *vi = BETA2 * *vi + (1.0 - BETA2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *x -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
    }
}
