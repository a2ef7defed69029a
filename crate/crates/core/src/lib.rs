//! Matrix-aware optimizer primitives: Newton–Schulz spectral filters
//! (Muon whitening and the Promotion/Suppression high-pass), SVD-backed
//! reference operators, the matching optimizer steppers, low-pass filter
//! fitting, and spectral/SNR diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.

pub mod diagnostics;
pub mod error;
pub mod lbfgs;
pub mod lpmuon;
pub mod matrix;
pub mod optim;
pub mod rng;
pub mod spectral;
pub mod svd;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use spectral::{FilterSchedule, QuinticOdd};
pub use svd::{msign_exact, svd_compact, SvdResult};
