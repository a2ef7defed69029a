//! Compact SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The factorization is the reference against which every polynomial filter
//! in this crate is checked, so it favours accuracy over speed: rotations run
//! until every column pair is orthogonal to 1e-12 relative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// Default relative rank cutoff (`σ < tol·σ_max` is dropped).
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

const ORTHOGONALITY_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvdResult {
    /// m×r, orthonormal columns.
    pub u: DenseMatrix,
    /// r strictly positive values, non-increasing.
    pub sigma: Vec<f64>,
    /// n×r, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U · diag(f(σ)) · Vᵀ`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let (m, n, r) = (self.u.rows(), self.v.rows(), self.rank());
        let mapped: Vec<f64> = self.sigma.iter().map(|s| f(*s)).collect();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let u_row = self.u.row(i);
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..r {
                let w = u_row[k] * mapped[k];
                if w == 0.0 {
                    continue;
                }
                for (j, o) in out_row.iter_mut().enumerate() {
                    *o += w * self.v.get(j, k);
                }
            }
        }
        DenseMatrix::new(m, n, out).expect("recomposition of finite factors is finite")
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.recompose_with(|s| s)
    }

    /// Partial isometry `U_k V_kᵀ` over the leading `min(k, r)` directions.
    pub fn top_polar(&self, k: usize) -> DenseMatrix {
        let keep = k.min(self.rank());
        self.recompose_with_index(|i, _| if i < keep { 1.0 } else { 0.0 })
    }

    fn recompose_with_index(&self, f: impl Fn(usize, f64) -> f64) -> DenseMatrix {
        let mapped: Vec<f64> = self.sigma.iter().enumerate().map(|(i, s)| f(i, *s)).collect();
        let view = SvdResult {
            u: self.u.clone(),
            sigma: mapped,
            v: self.v.clone(),
        };
        view.recompose_with(|s| s)
    }
}

/// Compact SVD with relative rank cutoff `tol`.
///
/// Errors with [`Error::Degenerate`] on the zero matrix (no positive singular
/// value survives) and [`Error::NoConvergence`] if rotations have not settled
/// after 60 sweeps.
pub fn svd_compact(m: &DenseMatrix, tol: f64) -> Result<SvdResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Config(format!("rank tolerance must be positive, got {tol}")));
    }
    // Rotate the columns of the tall orientation.
    let transposed = m.rows() < m.cols();
    let a = if transposed { m.transpose() } else { m.clone() };
    let (rows, cols) = a.shape();

    let mut work: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
    let mut rot: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let total: f64 = work.iter().map(|c| dot(c, c)).sum();
    if total == 0.0 {
        return Err(Error::Degenerate("SVD of the zero matrix has rank 0".into()));
    }
    let negligible = total * 1e-32;

    let mut converged = false;
    let mut worst = 0.0;
    for _ in 0..MAX_SWEEPS {
        worst = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&work[p], &work[p]);
                let beta = dot(&work[q], &work[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&work[p], &work[q]);
                let off = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                worst = worst.max(off);
                if off <= ORTHOGONALITY_TOL {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate(&mut work, p, q, c, s);
                rotate(&mut rot, p, q, c, s);
            }
        }
        if worst <= ORTHOGONALITY_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: worst,
        });
    }

    let norms: Vec<f64> = work.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma_max = norms[order[0]];
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&j| norms[j] > 0.0 && norms[j] >= tol * sigma_max)
        .collect();
    let r = kept.len();

    let mut left = vec![0.0; rows * r];
    let mut right = vec![0.0; cols * r];
    let mut sigma = Vec::with_capacity(r);
    for (k, &j) in kept.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        for i in 0..rows {
            left[i * r + k] = work[j][i] / s;
        }
        for i in 0..cols {
            right[i * r + k] = rot[j][i];
        }
    }
    let left = DenseMatrix::new(rows, r, left)?;
    let right = DenseMatrix::new(cols, r, right)?;
    let (mut u, mut v) = if transposed { (right, left) } else { (left, right) };
    fix_signs(&mut u, &mut v);
    Ok(SvdResult { u, sigma, v })
}

/// Exact polar factor `U Vᵀ` of the compact SVD.
pub fn msign_exact(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.is_zero() {
        return Err(Error::Degenerate("msign of the zero matrix is undefined".into()));
    }
    let svd = svd_compact(m, DEFAULT_RANK_TOL)?;
    Ok(svd.recompose_with(|_| 1.0))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// First non-negligible entry of each u-column is made positive; v follows.
fn fix_signs(u: &mut DenseMatrix, v: &mut DenseMatrix) {
    let r = u.cols();
    let mut flips = vec![false; r];
    for (k, flip) in flips.iter_mut().enumerate() {
        let col = u.column(k);
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            *flip = *first < 0.0;
        }
    }
    if flips.iter().any(|f| *f) {
        let sign = |k: usize| if flips[k] { -1.0 } else { 1.0 };
        *u = DenseMatrix::from_fn(u.rows(), r, |i, k| sign(k) * u.get(i, k)).expect("finite");
        *v = DenseMatrix::from_fn(v.rows(), r, |i, k| sign(k) * v.get(i, k)).expect("finite");
    }
}
