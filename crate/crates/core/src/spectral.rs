//! Odd quintic singular-value maps and the Newton–Schulz style matrix
//! iteration that applies them.
//!
//! A single step `X ← a₁X + a₃(XXᵀ)X + a₅(XXᵀ)²X` acts on `X = UΣVᵀ` as
//! `U f(Σ) Vᵀ` with `f(σ) = a₁σ + a₃σ³ + a₅σ⁵`, so a schedule of steps is
//! fully described by the composition of its scalar maps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Pre-normalization guard used when a config does not override it.
pub const DEFAULT_EPS: f64 = 1e-7;

/// Number of steps in every high-pass schedule.
pub const HIGH_PASS_STEPS: usize = 5;

pub const DEFAULT_PROMOTION_STEPS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuinticOdd {
    pub a1: f64,
    pub a3: f64,
    pub a5: f64,
}

impl QuinticOdd {
    /// Coefficients of the classic Muon orthogonalization step.
    pub const MUON_NS: QuinticOdd = QuinticOdd {
        a1: 3.4445,
        a3: -4.7750,
        a5: 2.0315,
    };

    pub const IDENTITY: QuinticOdd = QuinticOdd {
        a1: 1.0,
        a3: 0.0,
        a5: 0.0,
    };

    pub fn new(a1: f64, a3: f64, a5: f64) -> Result<Self> {
        if !(a1.is_finite() && a3.is_finite() && a5.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite quintic coefficients ({a1}, {a3}, {a5})"
            )));
        }
        Ok(QuinticOdd { a1, a3, a5 })
    }

    pub fn from_array(c: [f64; 3]) -> Result<Self> {
        Self::new(c[0], c[1], c[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a1, self.a3, self.a5]
    }

    /// Monotone step anchoring σ = 1 with the steepest feasible slope at 0.
    pub fn promotion() -> Self {
        derive_promotion().coefficients
    }

    /// Step with zero slope at the origin that contracts small σ towards 0.
    pub fn suppression() -> Self {
        derive_suppression()
    }

    #[inline]
    pub fn eval(&self, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        sigma * (self.a1 + s2 * (self.a3 + s2 * self.a5))
    }

    pub fn derivative(&self, sigma: f64) -> f64 {
        let s2 = sigma * sigma;
        self.a1 + 3.0 * self.a3 * s2 + 5.0 * self.a5 * s2 * s2
    }

    pub fn second_derivative(&self, sigma: f64) -> f64 {
        6.0 * self.a3 * sigma + 20.0 * self.a5 * sigma * sigma * sigma
    }
}

impl fmt::Display for QuinticOdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a1, self.a3, self.a5)
    }
}

pub fn eval_scalar(p: &QuinticOdd, sigma: f64) -> f64 {
    p.eval(sigma)
}

/// A linear condition on `(a₁, a₃, a₅)` at a point σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint {
    Value { at: f64, target: f64 },
    Slope { at: f64, target: f64 },
    Curvature { at: f64, target: f64 },
}

impl Constraint {
    fn row(&self) -> ([f64; 3], f64) {
        match *self {
            Constraint::Value { at, target } => ([at, at.powi(3), at.powi(5)], target),
            Constraint::Slope { at, target } => ([1.0, 3.0 * at * at, 5.0 * at.powi(4)], target),
            Constraint::Curvature { at, target } => ([0.0, 6.0 * at, 20.0 * at.powi(3)], target),
        }
    }
}

/// Solves three linear constraints for the quintic coefficients.
///
/// Cramer's rule keeps the small-integer systems used here exact in `f64`.
pub fn solve_constraints(constraints: [Constraint; 3]) -> Result<QuinticOdd> {
    let rows: Vec<([f64; 3], f64)> = constraints.iter().map(Constraint::row).collect();
    let a = [rows[0].0, rows[1].0, rows[2].0];
    let rhs = [rows[0].1, rows[1].1, rows[2].1];
    let det = det3(&a);
    if det == 0.0 {
        return Err(Error::Config(format!("constraints {constraints:?} are not independent")));
    }
    let mut coeffs = [0.0; 3];
    for (col, c) in coeffs.iter_mut().enumerate() {
        let mut swapped = a;
        for r in 0..3 {
            swapped[r][col] = rhs[r];
        }
        *c = det3(&swapped) / det;
    }
    QuinticOdd::from_array(coeffs)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Closed-form Promotion step together with the feasible coefficient box of
/// the monotone, fixed-point family it was chosen from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PromotionDesign {
    pub coefficients: QuinticOdd,
    pub a1_range: (f64, f64),
    pub a3_range: (f64, f64),
    pub a5_range: (f64, f64),
}

/// Fixed point and flat slope at σ = 1 leave a one-parameter family. Its
/// boundary-concavity edge (`f''(1) = 0`) gives the largest origin slope,
/// and `f'(0) = 0` is the other end of the monotone range.
pub fn derive_promotion() -> PromotionDesign {
    let fixed = Constraint::Value { at: 1.0, target: 1.0 };
    let flat = Constraint::Slope { at: 1.0, target: 0.0 };
    let steepest = solve_constraints([fixed, flat, Constraint::Curvature { at: 1.0, target: 0.0 }])
        .expect("promotion constraints are independent");
    let shallowest = solve_constraints([fixed, flat, Constraint::Slope { at: 0.0, target: 0.0 }])
        .expect("promotion constraints are independent");
    let span = |x: f64, y: f64| (x.min(y), x.max(y));
    PromotionDesign {
        coefficients: steepest,
        a1_range: span(shallowest.a1, steepest.a1),
        a3_range: span(shallowest.a3, steepest.a3),
        a5_range: span(shallowest.a5, steepest.a5),
    }
}

pub fn derive_suppression() -> QuinticOdd {
    solve_constraints([
        Constraint::Slope { at: 0.0, target: 0.0 },
        Constraint::Value { at: 1.0, target: 1.0 },
        Constraint::Slope { at: 1.0, target: 0.0 },
    ])
    .expect("suppression constraints are independent")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule")]
pub struct FilterSchedule {
    steps: Vec<QuinticOdd>,
    label: String,
}

#[derive(Deserialize)]
struct RawSchedule {
    steps: Vec<QuinticOdd>,
    #[serde(default)]
    label: String,
}

impl TryFrom<RawSchedule> for FilterSchedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        for p in &raw.steps {
            QuinticOdd::new(p.a1, p.a3, p.a5)?;
        }
        FilterSchedule::new(raw.steps, raw.label)
    }
}

impl FilterSchedule {
    pub fn new(steps: Vec<QuinticOdd>, label: impl Into<String>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Config("a filter schedule needs at least one step".into()));
        }
        Ok(FilterSchedule {
            steps,
            label: label.into(),
        })
    }

    pub fn repeated(p: QuinticOdd, times: usize, label: impl Into<String>) -> Result<Self> {
        Self::new(vec![p; times], label)
    }

    /// Five Muon steps.
    pub fn muon() -> Self {
        Self::repeated(QuinticOdd::MUON_NS, HIGH_PASS_STEPS, "muon_ns").expect("non-empty")
    }

    pub fn steps(&self) -> &[QuinticOdd] {
        &self.steps
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `(promotion, suppression)` step counts.
    pub fn stage_counts(&self) -> (usize, usize) {
        let (p, s) = (QuinticOdd::promotion(), QuinticOdd::suppression());
        (
            self.steps.iter().filter(|x| **x == p).count(),
            self.steps.iter().filter(|x| **x == s).count(),
        )
    }

    /// `f_k ∘ … ∘ f_1 (σ)`.
    pub fn eval(&self, sigma: f64) -> f64 {
        self.steps.iter().fold(sigma, |x, p| p.eval(x))
    }
}

pub fn eval_schedule(s: &FilterSchedule, sigma: f64) -> f64 {
    s.eval(sigma)
}

/// `k_p` Promotion steps followed by `5 − k_p` Suppression steps.
pub fn high_pass_schedule(k_p: usize) -> Result<FilterSchedule> {
    if k_p > HIGH_PASS_STEPS {
        return Err(Error::Config(format!(
            "promotion steps must be in 0..={HIGH_PASS_STEPS}, got {k_p}"
        )));
    }
    let mut steps = vec![QuinticOdd::promotion(); k_p];
    steps.extend(std::iter::repeat_n(QuinticOdd::suppression(), HIGH_PASS_STEPS - k_p));
    FilterSchedule::new(steps, format!("pion_kp{k_p}"))
}

/// One odd-quintic matrix step, with the Gram product on the thinner side.
pub fn ns_matrix_step(x: &DenseMatrix, p: &QuinticOdd) -> Result<DenseMatrix> {
    if x.cols() <= x.rows() {
        // X (a₁I + a₃G + a₅G²), G = XᵀX
        let poly = gram_polynomial(&x.gram_cols(), p)?;
        x.matmul(&poly)
    } else {
        // (a₁I + a₃G + a₅G²) X, G = XXᵀ
        let poly = gram_polynomial(&x.gram_rows(), p)?;
        poly.matmul(x)
    }
}

fn gram_polynomial(g: &DenseMatrix, p: &QuinticOdd) -> Result<DenseMatrix> {
    let g2 = g.matmul(g)?;
    let n = g.rows();
    DenseMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { p.a1 } else { 0.0 };
        diag + p.a3 * g.get(i, j) + p.a5 * g2.get(i, j)
    })
    .map_err(|_| Error::Degenerate("filter step overflowed".into()))
}

/// Frobenius pre-normalization followed by every step of `s`.
pub fn apply_filter(m: &DenseMatrix, s: &FilterSchedule, eps: f64) -> Result<DenseMatrix> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be finite and >= 0, got {eps}")));
    }
    let denom = m.frobenius_norm() + eps;
    if denom == 0.0 {
        return Err(Error::Degenerate(
            "zero matrix cannot be pre-normalized with eps = 0".into(),
        ));
    }
    let mut x = m.scale(1.0 / denom);
    for p in s.steps() {
        x = ns_matrix_step(&x, p)?;
    }
    Ok(x)
}
