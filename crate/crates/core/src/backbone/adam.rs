use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{BackboneParams, GcnGradients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 coefficient added to the gradient (`g + λ·w`), not decoupled.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 5e-4,
        }
    }
}

/// First and second moment estimates for each parameter matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    first_moments: Vec<Matrix>,
    second_moments: Vec<Matrix>,
    step: u64,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, shapes: &[(usize, usize)]) -> Self {
        Self {
            config,
            first_moments: shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect(),
            second_moments: shapes.iter().map(|&(r, c)| Matrix::zeros(r, c)).collect(),
            step: 0,
        }
    }

    pub fn for_backbone(config: AdamConfig, params: &BackboneParams) -> Self {
        Self::new(config, &[params.w0.shape(), params.w1.shape()])
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self, index: usize) -> &Matrix {
        &self.first_moments[index]
    }

    pub fn second_moment(&self, index: usize) -> &Matrix {
        &self.second_moments[index]
    }

    /// One bias-corrected Adam step over matching parameter/gradient lists.
    pub fn apply(&mut self, params: &mut [&mut Matrix], grads: &[&Matrix]) -> Result<()> {
        if params.len() != self.first_moments.len() || grads.len() != params.len() {
            return Err(Error::Shape(format!(
                "optimizer tracks {} tensors, got {} params and {} gradients",
                self.first_moments.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.shape() != self.first_moments[i].shape() || g.shape() != p.shape() {
                return Err(Error::Shape(format!("tensor {i} shape mismatch")));
            }
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            weight_decay,
        } = self.config;
        let t = self.step as i32;
        let bias1 = 1.0 - beta1.powi(t);
        let bias2 = 1.0 - beta2.powi(t);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.first_moments[i];
            let v = &mut self.second_moments[i];
            for k in 0..p.len() {
                let grad = g[k] + weight_decay * p[k];
                m[k] = beta1 * m[k] + (1.0 - beta1) * grad;
                v[k] = beta2 * v[k] + (1.0 - beta2) * grad * grad;
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                p[k] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}

/// Applies one Adam update to both backbone layers.
pub fn adam_step(
    params: &mut BackboneParams,
    grads: &GcnGradients,
    state: &mut OptimizerState,
) -> Result<()> {
    state.apply(
        &mut [&mut params.w0, &mut params.w1],
        &[&grads.w0, &grads.w1],
    )
}
