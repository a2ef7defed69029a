//! Verification suite run by `pion verify`: one check per acceptance
//! criterion, each with pinned tolerances and a wall-clock budget.

use std::time::{Duration, Instant};

use pion::diagnostics::{empirical_snr, kappa_g};
use pion::lbfgs::{minimize, LbfgsConfig};
use pion::lpmuon::{build_bands, fit, fit_loss, reference_table, theta_from_vec, theta_to_vec, FitConfig, ReferenceRow};
use pion::optim::{Optimizer, OptimizerConfig};
use pion::rng::{gaussian_matrix, stream, Rng};
use pion::spectral::{apply_filter, derive_promotion, derive_suppression, high_pass_schedule, ns_matrix_step, FilterSchedule};
use pion::svd::DEFAULT_RANK_TOL;
use pion::{msign_exact, svd_compact, DenseMatrix, QuinticOdd};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::HarnessResult;
use crate::experiments::{orthonormal_columns, run_experiment, run_headvar_demo, run_lowrank_stream};

type Check = fn() -> HarnessResult<(bool, String)>;

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub limit: Duration,
    check: Check,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub limit: Duration,
    pub elapsed: Duration,
}

impl CriterionOutcome {
    /// Report line without the measured time, so reruns compare byte for byte.
    pub fn line(&self) -> String {
        format!(
            "{} {:<3} {}: {} [limit {}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.limit.as_secs()
        )
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: "1", title: "coefficient exactness", limit: secs(1), check: coefficient_exactness },
    Criterion { id: "2", title: "svd factorization oracle", limit: secs(10), check: factorization_oracle },
    Criterion { id: "3", title: "scalar map properties", limit: secs(1), check: scalar_maps },
    Criterion { id: "4", title: "muon whitening", limit: secs(5), check: muon_whitening },
    Criterion { id: "5", title: "lrmuon equivalence", limit: secs(5), check: lrmuon_equivalence },
    Criterion { id: "6a", title: "reference table losses within 3x", limit: secs(60), check: reference_table_losses },
    Criterion { id: "6b", title: "fresh fit at tau=0.5", limit: secs(120), check: fresh_fit },
    Criterion { id: "7", title: "analytic snr model", limit: secs(1), check: analytic_snr },
    Criterion { id: "8", title: "empirical snr monte carlo", limit: secs(10), check: empirical_snr_mc },
    Criterion { id: "9a", title: "low-rank stream alignment", limit: secs(90), check: lowrank_alignment },
    Criterion { id: "9b", title: "cross-head update variance", limit: secs(30), check: head_variance },
];

pub fn run_criterion(c: &Criterion) -> CriterionOutcome {
    let start = Instant::now();
    let (mut passed, mut detail) = match (c.check)() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    if elapsed > c.limit {
        passed = false;
        detail.push_str("; over time budget");
    }
    CriterionOutcome { id: c.id, title: c.title, passed, detail, limit: c.limit, elapsed }
}

/// Runs the selected criteria (all when `only` is empty). An id selects
/// itself and its lettered parts, so "6" runs 6a and 6b.
pub fn run_suite(only: &[String]) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.iter().any(|o| c.id == o || c.id.trim_end_matches(char::is_alphabetic) == o))
        .map(run_criterion)
        .collect()
}

pub fn render_report(outcomes: &[CriterionOutcome]) -> String {
    let mut out: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    out.push_str(&format!("{} passed, {} failed\n", outcomes.len() - failed, failed));
    out
}

/// Runs the suite and every canonical experiment a second time and
/// compares the artifacts byte for byte against `first_report`.
pub fn determinism(first_report: &str, only: &[String]) -> HarnessResult<(bool, String)> {
    let second = render_report(&run_suite(only));
    let mut mismatched: Vec<&str> = Vec::new();
    if second != first_report {
        mismatched.push("verify");
    }
    for kind in ExperimentKind::ALL {
        let cfg = ExperimentConfig::default_for(kind);
        let a = run_experiment(&cfg)?;
        let b = run_experiment(&cfg)?;
        if a.csv() != b.csv() || a.summary != b.summary {
            mismatched.push(kind.name());
        }
    }
    let detail = if mismatched.is_empty() {
        format!("verify report and {} experiments byte-identical across runs", ExperimentKind::ALL.len())
    } else {
        format!("differing outputs: {}", mismatched.join(", "))
    };
    Ok((mismatched.is_empty(), detail))
}

/// `U diag(σ) Vᵀ` from orthonormal factors, so the singular triplets are
/// known without calling the SVD.
fn with_spectrum(rng: &mut Rng, rows: usize, cols: usize, sigma: &[f64]) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let u = orthonormal_columns(rng, rows, sigma.len());
    let v = orthonormal_columns(rng, cols, sigma.len());
    let m = u
        .matmul(&DenseMatrix::from_diag(sigma).expect("finite"))
        .and_then(|x| x.matmul(&v.transpose()))
        .expect("conforming");
    (m, u, v)
}

fn coefficient_exactness() -> HarnessResult<(bool, String)> {
    let design = derive_promotion();
    let p = design.coefficients.to_array();
    let s = derive_suppression().to_array();
    let exact = p == [1.875, -1.25, 0.375] && s == [0.0, 2.5, -1.5];
    let (lo, hi) = design.a1_range;
    let range_ok = lo.abs() <= 1e-15 && (hi - 1.875).abs() <= 1e-15;
    Ok((
        exact && range_ok,
        format!("promotion {p:?}, suppression {s:?}, a1 range [{lo}, {hi}]"),
    ))
}

fn factorization_oracle() -> HarnessResult<(bool, String)> {
    let polys = [QuinticOdd::MUON_NS, QuinticOdd::promotion(), QuinticOdd::suppression()];
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, &(rows, cols)) in [(4, 4), (8, 6), (12, 5)].iter().enumerate() {
        for seed in 0..50 {
            let m = gaussian_matrix(&mut stream(seed, 20 + k as u64), rows, cols, 1.0);
            let x = m.scale(1.0 / m.frobenius_norm());
            let svd = svd_compact(&x, DEFAULT_RANK_TOL)?;
            for p in &polys {
                let err = ns_matrix_step(&x, p)?.sub(&svd.recompose_with(|s| p.eval(s)))?.frobenius_norm();
                worst = worst.max(err / x.frobenius_norm().max(1.0));
            }
            count += 1;
        }
    }
    Ok((worst <= 1e-9, format!("{count} matrices x 3 triples, worst relative error {worst:.3e} (tol 1e-9)")))
}

fn scalar_maps() -> HarnessResult<(bool, String)> {
    let p = QuinticOdd::promotion();
    let s = QuinticOdd::suppression();
    let mut worst_dp = 0.0f64;
    let mut worst_ds = 0.0f64;
    let mut in_range = true;
    for i in 0..=1000 {
        let x = i as f64 / 1000.0;
        worst_dp = worst_dp.max((p.derivative(x) - 1.875 * (1.0 - x * x).powi(2)).abs());
        worst_ds = worst_ds.max((s.derivative(x) - 7.5 * x * x * (1.0 - x * x)).abs());
        in_range &= (0.0..=1.0).contains(&p.eval(x)) && (0.0..=1.0).contains(&s.eval(x));
    }
    // Two Promotion steps after three Suppression steps, written out by hand.
    let promote = |x: f64| 1.875 * x - 1.25 * x.powi(3) + 0.375 * x.powi(5);
    let suppress = |x: f64| 2.5 * x.powi(3) - 1.5 * x.powi(5);
    let oracle = |x: f64| suppress(suppress(suppress(promote(promote(x)))));
    let schedule = high_pass_schedule(2)?;
    let (lo, hi) = (oracle(0.05), oracle(0.8));
    let agree = (schedule.eval(0.05) - lo).abs() <= 1e-15 && (schedule.eval(0.8) - hi).abs() <= 1e-15;
    let passed = worst_dp <= 1e-12 && worst_ds <= 1e-12 && in_range && lo <= 1e-4 && hi >= 0.999 && agree;
    Ok((
        passed,
        format!(
            "derivative errors {worst_dp:.1e}/{worst_ds:.1e}, maps in [0,1]: {in_range}, pion_kp2(0.05)={lo:.3e}, pion_kp2(0.8)={hi:.6}"
        ),
    ))
}

fn muon_whitening() -> HarnessResult<(bool, String)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut min_normalized = f64::INFINITY;
    let mut count = 0;
    for (k, &(rows, cols)) in [(6, 6), (8, 5), (10, 4)].iter().enumerate() {
        for seed in 0..20 {
            let mut rng = stream(seed, 40 + k as u64);
            let n = rows.min(cols);
            let sigma: Vec<f64> = gaussian_matrix(&mut rng, n, 1, 1.0)
                .as_slice()
                .iter()
                .map(|g| 0.3 + 0.7 * (0.5 + 0.5 * (g / 2.0).tanh()))
                .collect();
            let (m, _, _) = with_spectrum(&mut rng, rows, cols, &sigma);
            let norm = m.frobenius_norm();
            min_normalized = min_normalized.min(sigma.iter().cloned().fold(f64::INFINITY, f64::min) / norm);
            let out = svd_compact(&apply_filter(&m, &FilterSchedule::muon(), 1e-7)?, DEFAULT_RANK_TOL)?;
            lo = lo.min(out.sigma.iter().cloned().fold(f64::INFINITY, f64::min));
            hi = hi.max(out.sigma[0]);
            count += 1;
        }
    }
    let passed = min_normalized > 0.1 && lo >= 0.6 && hi <= 1.4;
    Ok((
        passed,
        format!("{count} matrices, min normalized sigma {min_normalized:.3}, output sigma in [{lo:.4}, {hi:.4}]"),
    ))
}

fn lrmuon_direction(m: &DenseMatrix, k: usize) -> HarnessResult<DenseMatrix> {
    let mut opt = Optimizer::new(OptimizerConfig::lrmuon(1.0, k).with_mu(0.0), m.shape())?;
    let mut p = DenseMatrix::zeros(m.rows(), m.cols());
    Ok(opt.step(&mut p, m)?.direction)
}

fn lrmuon_equivalence() -> HarnessResult<(bool, String)> {
    let mut worst_full = 0.0f64;
    let mut worst_top = 0.0f64;
    let mut worst_msign = 0.0f64;
    for seed in 0..20 {
        let mut rng = stream(seed, 50);
        for (sigma, k_full) in [(vec![3.0, 1.5, 0.7, 0.2], 4), (vec![2.0, 1.0], 3)] {
            let (m, u, v) = with_spectrum(&mut rng, 7, 5, &sigma);
            let polar = u.matmul(&v.transpose())?;
            worst_full = worst_full.max(lrmuon_direction(&m, k_full)?.sub(&msign_exact(&m)?)?.max_abs());
            worst_msign = worst_msign.max(msign_exact(&m)?.sub(&polar)?.max_abs());
            let top = u.col_block(0..1)?.matmul(&v.col_block(0..1)?.transpose())?;
            worst_top = worst_top.max(lrmuon_direction(&m, 1)?.sub(&top)?.max_abs());
        }
    }
    let passed = worst_full <= 1e-8 && worst_top <= 1e-8 && worst_msign <= 1e-8;
    Ok((
        passed,
        format!("k>=rank vs msign {worst_full:.1e}, msign vs constructed polar {worst_msign:.1e}, k=1 vs u1v1^T {worst_top:.1e} (tol 1e-8)"),
    ))
}

/// Smallest loss reachable by moving each coefficient at most half a unit
/// in the third decimal, the rounding interval of a three-decimal table.
pub fn rounding_interval_loss(row: &ReferenceRow) -> HarnessResult<f64> {
    let center = theta_to_vec(&row.theta);
    let cfg = FitConfig::new(row.tau, 0);
    let grid = build_bands(&cfg)?;
    let objective = |z: &[f64]| {
        let x: Vec<f64> = center.iter().zip(z).map(|(c, z)| c + 5e-4 * z.tanh()).collect();
        theta_from_vec(&x).map(|t| fit_loss(&t, &grid, &cfg)).unwrap_or(f64::INFINITY)
    };
    Ok(minimize(objective, &vec![0.0; center.len()], &LbfgsConfig::default()).f)
}

fn reference_table_losses() -> HarnessResult<(bool, String)> {
    let mut ratios = Vec::new();
    let mut box_ratios = Vec::new();
    for row in reference_table()? {
        let cfg = FitConfig::new(row.tau, 0);
        let loss = fit_loss(&row.theta, &build_bands(&cfg)?, &cfg);
        let ratio = (loss / row.loss).max(row.loss / loss);
        ratios.push((row.tau, ratio));
        let boxed = rounding_interval_loss(&row)?;
        box_ratios.push((boxed / row.loss).max(row.loss / boxed));
    }
    let failing: Vec<String> =
        ratios.iter().filter(|(_, r)| *r > 3.0 || r.is_nan()).map(|(t, r)| format!("tau={t}: {r:.2}x")).collect();
    let box_worst = box_ratios.iter().cloned().fold(0.0, f64::max);
    let detail = if failing.is_empty() {
        format!("all {} rows within 3x", ratios.len())
    } else {
        format!(
            "{}/{} rows outside 3x ({}); best loss inside the +-0.0005 rounding interval is within {box_worst:.2}x for every row",
            failing.len(),
            ratios.len(),
            failing.join(", ")
        )
    };
    Ok((failing.is_empty(), detail))
}

fn fresh_fit() -> HarnessResult<(bool, String)> {
    let result = fit(&FitConfig::new(0.5, 0))?;
    let pass = result.eval(0.25);
    let stop = result.eval(0.75);
    let passed = result.loss <= 0.01 && (0.9..=1.1).contains(&pass) && stop.abs() <= 0.15;
    Ok((
        passed,
        format!("loss {:.6}, f(0.25)={pass:.4}, f(0.75)={stop:.4}, best restart {}", result.loss, result.best_index),
    ))
}

fn analytic_snr() -> HarnessResult<(bool, String)> {
    let exact = kappa_g(2, 0.5)? == 0.125;
    let mut worst_sym = 0.0f64;
    for g in [2, 3, 4, 8, 16, 64, 256] {
        for i in 1..20 {
            let p = i as f64 * 0.05;
            let (a, b) = (kappa_g(g, p)?, kappa_g(g, 1.0 - p)?);
            worst_sym = worst_sym.max((a - b).abs() / a);
        }
    }
    let mut worst_large = 0.0f64;
    for i in 0..=60 {
        let p = 0.2 + i as f64 * 0.01;
        let target = p * (1.0 - p);
        worst_large = worst_large.max((kappa_g(64, p)? - target).abs() / target);
    }
    let passed = exact && worst_sym <= 1e-12 && worst_large <= 0.05;
    Ok((
        passed,
        format!("kappa_2(0.5)=0.125 exact: {exact}, symmetry error {worst_sym:.1e}, kappa_64 vs p(1-p) {:.2}%", 100.0 * worst_large),
    ))
}

fn empirical_snr_mc() -> HarnessResult<(bool, String)> {
    let (m, n, s) = (8, 6, 0.5);
    let mu = DenseMatrix::from_fn(m, n, |i, j| ((i * 5 + j * 3) % 7) as f64 * 0.1 - 0.3)?;
    let expected = mu.frobenius_norm().powi(2) / ((m * n) as f64 * s * s);
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let mut rng = stream(seed, 80);
        let samples = (0..2000)
            .map(|_| mu.add(&gaussian_matrix(&mut rng, m, n, s)))
            .collect::<pion::Result<Vec<_>>>()?;
        let est = empirical_snr(&samples)?;
        worst = worst.max((est.snr - expected).abs() / expected);
    }
    Ok((worst <= 0.1, format!("closed form {expected:.4}, worst relative deviation {:.2}% over 3 seeds", 100.0 * worst)))
}

fn lowrank_alignment() -> HarnessResult<(bool, String)> {
    let cfg = ExperimentConfig {
        optimizers: vec![OptimizerConfig::muon(0.02), OptimizerConfig::pion(0.02, 2)],
        ..ExperimentConfig::default_for(ExperimentKind::LowrankStream)
    };
    let (_, summaries) = run_lowrank_stream(&cfg)?;
    let muon = &summaries[0];
    let pion = &summaries[1];
    let margin = pion.mean_alignment - muon.mean_alignment;
    Ok((
        margin >= 0.05,
        format!(
            "alignment pion {:.4} vs muon {:.4} (margin {margin:.4}), erank pion {:.3} vs muon {:.3}",
            pion.mean_alignment, muon.mean_alignment, pion.mean_erank, muon.mean_erank
        ),
    ))
}

fn head_variance() -> HarnessResult<(bool, String)> {
    let (_, rows) = run_headvar_demo(&ExperimentConfig::default_for(ExperimentKind::HeadvarDemo))?;
    let mut passed = true;
    let mut worst_default = 0.0f64;
    let mut least_per_head = f64::INFINITY;
    for pair in rows.chunks(2) {
        let (d, p) = (&pair[0], &pair[1]);
        let rel = d.update_norm_variance / d.update_norm_mean;
        worst_default = worst_default.max(rel);
        least_per_head = least_per_head.min(p.update_norm_variance);
        passed &= rel <= 1e-10 && p.update_norm_variance > 0.0;
    }
    Ok((
        passed,
        format!(
            "{} layers, default variance/mean <= {worst_default:.1e}, per-head variance >= {least_per_head:.3e}",
            rows.len() / 2
        ),
    ))
}
