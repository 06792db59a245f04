//! Adam with bias correction. Moments mirror the network's parameter
//! tensors one-to-one; a non-finite gradient skips the step (leaving the
//! step counter untouched) instead of poisoning the weights.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::{Gradients, Network};

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Default::default()
        }
    }
}

pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    pub fn for_network(net: &Network) -> AdamState {
        let shapes: Vec<Vec<usize>> = net
            .param_tensors()
            .iter()
            .map(|(_, t)| t.shape().to_vec())
            .collect();
        AdamState {
            m: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            v: shapes.iter().map(|s| Tensor::zeros(s)).collect(),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn moments(&self, idx: usize) -> (&Tensor, &Tensor) {
        (&self.m[idx], &self.v[idx])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdamOutcome {
    Applied,
    /// The gradient contained NaN/Inf; parameters and moments unchanged.
    SkippedNonFinite,
}

pub fn adam_step(
    net: &mut Network,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<AdamOutcome> {
    {
        let params = net.param_tensors();
        if params.len() != grads.tensors.len() || params.len() != state.m.len() {
            return Err(Error::config(format!(
                "adam: {} parameter tensors, {} gradient tensors, {} moment tensors",
                params.len(),
                grads.tensors.len(),
                state.m.len()
            )));
        }
        for ((name, p), g) in params.iter().zip(&grads.tensors) {
            if p.shape() != g.shape() {
                return Err(Error::config(format!(
                    "adam: gradient shape {:?} does not match {} {:?}",
                    g.shape(),
                    name,
                    p.shape()
                )));
            }
        }
    }
    if grads.tensors.iter().any(|t| !t.all_finite()) {
        return Ok(AdamOutcome::SkippedNonFinite);
    }

    state.step += 1;
    let bc1 = 1.0 - cfg.beta1.powi(state.step as i32);
    let bc2 = 1.0 - cfg.beta2.powi(state.step as i32);
    for (idx, (_, p)) in net.param_tensors_mut().into_iter().enumerate() {
        let g = grads.tensors[idx].data();
        let m = state.m[idx].data_mut();
        let v = state.v[idx].data_mut();
        let pd = p.data_mut();
        for i in 0..pd.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            pd[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(AdamOutcome::Applied)
}
