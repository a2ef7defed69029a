use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Heavy-ball buffer `M ← μ·M + G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumState {
    pub buffer: DenseMatrix,
    pub mu: f64,
}

impl MomentumState {
    pub fn new(rows: usize, cols: usize, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(MomentumState {
            buffer: DenseMatrix::zeros(rows, cols),
            mu,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.buffer.shape()
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::Config(format!("momentum mu must lie in [0, 1), got {mu}")));
    }
    Ok(())
}

pub fn momentum_update<'a>(state: &'a mut MomentumState, grad: &DenseMatrix) -> Result<&'a DenseMatrix> {
    state.buffer.scale_add_in_place(state.mu, grad)?;
    Ok(&state.buffer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mu_copies_grad() {
        let g = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap();
        let mut s = MomentumState::new(2, 2, 0.0).unwrap();
        momentum_update(&mut s, &g).unwrap();
        assert_eq!(s.buffer, g);
        momentum_update(&mut s, &g).unwrap();
        assert_eq!(s.buffer, g);
    }

    #[test]
    fn geometric_decay() {
        let b = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let mut s = MomentumState {
            buffer: b.clone(),
            mu: 0.9,
        };
        let zero = DenseMatrix::zeros(1, 2);
        momentum_update(&mut s, &zero).unwrap();
        momentum_update(&mut s, &zero).unwrap();
        for (x, y) in s.buffer.as_slice().iter().zip(b.as_slice()) {
            assert!((x - 0.81 * y).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_grad_approaches_series_limit() {
        let g = DenseMatrix::from_rows(&[vec![1.0, -0.5, 2.0]]).unwrap();
        let mut s = MomentumState::new(1, 3, 0.95).unwrap();
        for _ in 0..200 {
            momentum_update(&mut s, &g).unwrap();
        }
        for (x, y) in s.buffer.as_slice().iter().zip(g.as_slice()) {
            let limit = y / 0.05;
            assert!(((x - limit) / limit).abs() < 0.01);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(MomentumState::new(2, 2, 1.0).is_err());
        assert!(MomentumState::new(2, 2, -0.1).is_err());
        let mut s = MomentumState::new(2, 2, 0.5).unwrap();
        assert!(matches!(
            momentum_update(&mut s, &DenseMatrix::zeros(2, 3)),
            Err(Error::Shape { .. })
        ));
    }
}
