use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

impl AdamParams {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("adam eps must be positive, got {}", self.eps)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: DenseMatrix,
    pub v: DenseMatrix,
    pub step: u64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        AdamState {
            m: DenseMatrix::zeros(rows, cols),
            v: DenseMatrix::zeros(rows, cols),
            step: 0,
        }
    }
}

/// Decoupled weight decay AdamW. Returns the applied update divided by `lr`.
pub fn adamw_step(
    param: &mut DenseMatrix,
    grad: &DenseMatrix,
    state: &mut AdamState,
    lr: f64,
    hp: &AdamParams,
) -> Result<DenseMatrix> {
    param.check_same_shape(grad, "adamw_step")?;
    param.check_same_shape(&state.m, "adamw_step")?;
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - hp.beta1.powi(t);
    let bc2 = 1.0 - hp.beta2.powi(t);
    let (rows, cols) = param.shape();
    let g = grad.as_slice();
    let m: Vec<f64> = state
        .m
        .as_slice()
        .iter()
        .zip(g)
        .map(|(m, g)| hp.beta1 * m + (1.0 - hp.beta1) * g)
        .collect();
    let v: Vec<f64> = state
        .v
        .as_slice()
        .iter()
        .zip(g)
        .map(|(v, g)| hp.beta2 * v + (1.0 - hp.beta2) * g * g)
        .collect();
    let dir: Vec<f64> = m
        .iter()
        .zip(&v)
        .zip(param.as_slice())
        .map(|((m, v), p)| (m / bc1) / ((v / bc2).sqrt() + hp.eps) + hp.weight_decay * p)
        .collect();
    state.m = DenseMatrix::new(rows, cols, m)?;
    state.v = DenseMatrix::new(rows, cols, v)?;
    let dir = DenseMatrix::new(rows, cols, dir)?;
    param.axpy_in_place(-lr, &dir)?;
    Ok(dir)
}
