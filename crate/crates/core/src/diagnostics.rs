//! Effective rank, gradient SNR (empirical and the analytic SFT/GRPO model),
//! and cross-head norm variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::svd::{svd_compact, DEFAULT_RANK_TOL};

pub const VARIANCE_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `min(m, n)` singular values, non-increasing, zeros included.
    pub sigmas: Vec<f64>,
    pub probs: Vec<f64>,
    pub entropy: f64,
    pub erank: f64,
}

/// Spectrum report for an explicit list of non-negative singular values.
pub fn spectrum_from_sigmas(sigmas: &[f64]) -> Result<SpectrumReport> {
    if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidMatrix("singular values must be finite and >= 0".into()));
    }
    let mut sigmas = sigmas.to_vec();
    sigmas.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sigmas.iter().sum();
    if total <= 0.0 {
        return Err(Error::Degenerate("effective rank of a zero spectrum".into()));
    }
    let probs: Vec<f64> = sigmas.iter().map(|s| s / total).collect();
    let entropy = -probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>();
    Ok(SpectrumReport {
        sigmas,
        probs,
        entropy,
        erank: entropy.exp(),
    })
}

pub fn erank(m: &DenseMatrix) -> Result<SpectrumReport> {
    if m.is_zero() {
        return Err(Error::Degenerate("effective rank of a zero matrix".into()));
    }
    let mut sigmas = svd_compact(m, DEFAULT_RANK_TOL)?.sigma;
    sigmas.resize(m.rows().min(m.cols()), 0.0);
    spectrum_from_sigmas(&sigmas)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    pub mean_sq_norm: f64,
    pub variance: f64,
    pub snr: f64,
    pub sample_count: usize,
}

/// `‖Ê[G]‖²_F / Ê‖G − Ê[G]‖²_F` over a batch of equally shaped samples.
pub fn empirical_snr(samples: &[DenseMatrix]) -> Result<SnrEstimate> {
    if samples.len() < 2 {
        return Err(Error::Config(format!(
            "empirical SNR needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let (rows, cols) = samples[0].shape();
    let n = samples.len() as f64;
    let mut mean = vec![0.0; rows * cols];
    for s in samples {
        samples[0].check_same_shape(s, "empirical_snr")?;
        mean.iter_mut().zip(s.as_slice()).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let variance = samples
        .iter()
        .map(|s| {
            s.as_slice()
                .iter()
                .zip(&mean)
                .map(|(x, m)| (x - m) * (x - m))
                .sum::<f64>()
        })
        .sum::<f64>()
        / n;
    if variance < VARIANCE_FLOOR {
        return Err(Error::DegenerateVariance(format!(
            "sample variance {variance:e} is below the floor {VARIANCE_FLOOR:e}"
        )));
    }
    let mean_sq_norm = mean.iter().map(|m| m * m).sum::<f64>();
    Ok(SnrEstimate {
        mean_sq_norm,
        variance,
        snr: mean_sq_norm / variance,
        sample_count: samples.len(),
    })
}

/// Inputs of the analytic SFT vs. GRPO gradient SNR model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlvrSnrParams {
    /// Group size.
    pub g: u64,
    /// Success probability.
    pub p: f64,
    /// Representative response length.
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma_s_sq: f64,
    pub sbar_sq: f64,
    pub delta_sq: f64,
    #[serde(default)]
    pub chi_sq: f64,
    #[serde(default)]
    pub alpha: f64,
}

impl RlvrSnrParams {
    pub fn validate(&self) -> Result<()> {
        check_group(self.g, self.p)?;
        let nonneg = [self.t, self.sigma_s_sq, self.sbar_sq, self.delta_sq, self.chi_sq];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("T and all variances must be finite and >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

fn check_group(g: u64, p: f64) -> Result<()> {
    if g < 2 {
        return Err(Error::Config(format!("group size must be >= 2, got {g}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Probability that a group of `g` rollouts mixes successes and failures.
pub fn q_nd(g: u64, p: f64) -> Result<f64> {
    check_group(g, p)?;
    let g = g as f64;
    Ok(1.0 - p.powf(g) - (1.0 - p).powf(g))
}

/// `Binom(g, K, p)` for K = 0..=g, through log-binomial coefficients.
fn binomial_pmf(g: u64, p: f64) -> Vec<f64> {
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    (0..=g)
        .map(|k| {
            if k > 0 {
                log_choose += ((g - k + 1) as f64).ln() - (k as f64).ln();
            }
            (log_choose + k as f64 * lp + (g - k) as f64 * lq).exp()
        })
        .collect()
}

pub fn rho_g(g: u64, p: f64) -> Result<f64> {
    let q = q_nd(g, p)?;
    let pmf = binomial_pmf(g, p);
    let gf = g as f64;
    let sum: f64 = (1..g)
        .map(|k| {
            let r = k as f64 / gf;
            (r * (1.0 - r)).sqrt() * pmf[k as usize]
        })
        .sum();
    Ok(sum / q)
}

pub fn kappa_g(g: u64, p: f64) -> Result<f64> {
    let rho = rho_g(g, p)?;
    Ok(q_nd(g, p)? * rho * rho)
}

/// `g·T·‖s̄‖²/σ_s²`. Accepts any group size `g ≥ 1`.
pub fn snr_sft(params: &RlvrSnrParams) -> Result<f64> {
    if params.g == 0 {
        return Err(Error::Config("group size must be positive".into()));
    }
    if !(params.sigma_s_sq > 0.0) {
        return Err(Error::DegenerateVariance("sigma_s_sq must be positive".into()));
    }
    Ok(params.g as f64 * params.t * params.sbar_sq / params.sigma_s_sq)
}

/// `g·T·κ_g(p)·‖Δ‖²/σ_s²`.
pub fn snr_grpo(params: &RlvrSnrParams) -> Result<f64> {
    params.validate()?;
    if !(params.sigma_s_sq > 0.0) {
        return Err(Error::DegenerateVariance("sigma_s_sq must be positive".into()));
    }
    let kappa = kappa_g(params.g, params.p)?;
    Ok(params.g as f64 * params.t * kappa * params.delta_sq / params.sigma_s_sq)
}

/// SFT-to-GRPO SNR ratio `(‖s̄‖²/(κ‖Δ‖²))·(1 + χ²)/(1 − α)`.
pub fn snr_ratio_full(params: &RlvrSnrParams) -> Result<f64> {
    params.validate()?;
    if params.delta_sq == 0.0 {
        return Err(Error::Degenerate("SNR ratio is undefined for delta_sq = 0".into()));
    }
    let kappa = kappa_g(params.g, params.p)?;
    Ok(params.sbar_sq / (kappa * params.delta_sq) * (1.0 + params.chi_sq) / (1.0 - params.alpha))
}

/// Population variance of `x`.
pub fn population_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Population variance of the per-head Frobenius norms.
pub fn head_norm_variance(blocks: &[DenseMatrix]) -> Result<f64> {
    if blocks.len() < 2 {
        return Err(Error::Config(format!(
            "head norm variance needs at least 2 blocks, got {}",
            blocks.len()
        )));
    }
    let norms: Vec<f64> = blocks.iter().map(|b| b.frobenius_norm()).collect();
    Ok(population_variance(&norms))
}

/// `⟨A, B⟩ / (‖A‖_F ‖B‖_F)`; zero when either side is zero.
pub fn frobenius_cosine(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    let d = a.frobenius_dot(b)?;
    let denom = a.frobenius_norm() * b.frobenius_norm();
    Ok(if denom == 0.0 { 0.0 } else { d / denom })
}
