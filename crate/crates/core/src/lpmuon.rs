//! Fitting the five-step low-pass composition: band grids, the weighted band
//! loss, and warm-started multi-restart L-BFGS.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lbfgs::{minimize, LbfgsConfig, StopReason};
use crate::rng::stream;
use crate::spectral::{FilterSchedule, QuinticOdd};

pub const STEPS: usize = 5;
pub const NUM_COEFFS: usize = 3 * STEPS;

/// Reference coefficients and losses for τ = 0.1, …, 0.9, as published.
pub const REFERENCE_TABLE_CSV: &str = include_str!("../data/lowpass_table.csv");

pub type Theta = [QuinticOdd; STEPS];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub tau: f64,
    pub delta: f64,
    pub lambda_pass: f64,
    pub lambda_stop: f64,
    pub lambda_over: f64,
    pub lambda_nn: f64,
    pub restarts: usize,
    pub perturb_std: f64,
    pub clip_bound: f64,
    pub samples_per_band: usize,
    /// Used instead of `samples_per_band` when the stop band is shorter
    /// than `short_band_length`.
    pub short_band_samples: usize,
    pub short_band_length: f64,
    pub overshoot_threshold: f64,
    pub max_iters: usize,
    pub f_tol: f64,
    pub g_tol: f64,
    pub fd_step: f64,
    pub divergence_bound: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tau: 0.5,
            delta: 0.03,
            lambda_pass: 3.0,
            lambda_stop: 8.0,
            lambda_over: 30.0,
            lambda_nn: 30.0,
            restarts: 8,
            perturb_std: 0.25,
            clip_bound: 1e3,
            samples_per_band: 250,
            short_band_samples: 50,
            short_band_length: 0.1,
            overshoot_threshold: 1.02,
            max_iters: 2000,
            f_tol: 1e-12,
            g_tol: 1e-9,
            fd_step: 1e-6,
            divergence_bound: 1e6,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn new(tau: f64, seed: u64) -> Self {
        FitConfig {
            tau,
            seed,
            ..FitConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.tau - self.delta > 0.01) {
            return Err(Error::Config(format!(
                "pass band [0.01, {}] is empty",
                self.tau - self.delta
            )));
        }
        if self.tau + self.delta >= 1.0 {
            return Err(Error::Config(format!(
                "stop band [{}, 1] is empty",
                self.tau + self.delta
            )));
        }
        if self.restarts == 0 || self.samples_per_band < 2 || self.short_band_samples < 2 {
            return Err(Error::Config("restarts >= 1 and at least 2 samples per band required".into()));
        }
        let weights = [self.lambda_pass, self.lambda_stop, self.lambda_over, self.lambda_nn];
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Config("loss weights must be finite and >= 0".into()));
        }
        if !(self.perturb_std >= 0.0 && self.clip_bound > 0.0 && self.fd_step > 0.0) {
            return Err(Error::Config("perturb_std, clip_bound and fd_step must be positive".into()));
        }
        Ok(())
    }

    pub fn samples_for_bands(&self) -> usize {
        if 1.0 - (self.tau + self.delta) < self.short_band_length {
            self.short_band_samples
        } else {
            self.samples_per_band
        }
    }

    fn lbfgs(&self) -> LbfgsConfig {
        LbfgsConfig {
            max_iters: self.max_iters,
            f_tol: self.f_tol,
            g_tol: self.g_tol,
            fd_step: self.fd_step,
            ..LbfgsConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandGrid {
    /// Sorted, negatives mirrored in.
    pub pass_points: Vec<f64>,
    pub stop_points: Vec<f64>,
    pub pass_positive: Vec<f64>,
    pub stop_positive: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

fn mirrored(positive: &[f64]) -> Vec<f64> {
    positive
        .iter()
        .rev()
        .map(|x| -x)
        .chain(positive.iter().copied())
        .collect()
}

pub fn build_bands(cfg: &FitConfig) -> Result<BandGrid> {
    cfg.validate()?;
    let n = cfg.samples_for_bands();
    let pass_positive = linspace(0.01, cfg.tau - cfg.delta, n);
    let stop_positive = linspace(cfg.tau + cfg.delta, 1.0, n);
    Ok(BandGrid {
        pass_points: mirrored(&pass_positive),
        stop_points: mirrored(&stop_positive),
        pass_positive,
        stop_positive,
    })
}

/// The five-step composition with every intermediate iterate clipped.
pub fn compose_clipped(theta: &Theta, sigma: f64, clip: f64) -> f64 {
    theta
        .iter()
        .fold(sigma, |x, p| p.eval(x).clamp(-clip, clip))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub pass: f64,
    pub stop: f64,
    pub over: f64,
    pub nn: f64,
    pub total: f64,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    xs.sum::<f64>() / n
}

pub fn loss_terms(theta: &Theta, grid: &BandGrid, cfg: &FitConfig) -> LossTerms {
    let f = |s: f64| compose_clipped(theta, s, cfg.clip_bound);
    let fp: Vec<f64> = grid.pass_points.iter().map(|s| f(*s)).collect();
    let fs: Vec<f64> = grid.stop_points.iter().map(|s| f(*s)).collect();
    let pass = mean(
        fp.iter()
            .zip(&grid.pass_points)
            .map(|(v, s)| (v - s.signum()).powi(2)),
    );
    let stop = mean(fs.iter().map(|v| v * v));
    let over = fp
        .iter()
        .chain(&fs)
        .map(|v| (v.abs() - cfg.overshoot_threshold).max(0.0).powi(2))
        .sum::<f64>()
        / (fp.len() + fs.len()) as f64;
    let negative_part = |pts: &[f64]| mean(pts.iter().map(|s| (-f(*s)).max(0.0).powi(2)));
    let nn = negative_part(&grid.pass_positive) + negative_part(&grid.stop_positive);
    let total = cfg.lambda_pass * pass + cfg.lambda_stop * stop + cfg.lambda_over * over + cfg.lambda_nn * nn;
    LossTerms {
        pass,
        stop,
        over,
        nn,
        total,
    }
}

pub fn fit_loss(theta: &Theta, grid: &BandGrid, cfg: &FitConfig) -> f64 {
    loss_terms(theta, grid, cfg).total
}

pub fn warm_start() -> Theta {
    let p = QuinticOdd::promotion();
    [QuinticOdd::IDENTITY, p, p, p, p]
}

pub fn theta_to_vec(theta: &Theta) -> Vec<f64> {
    theta.iter().flat_map(|p| p.to_array()).collect()
}

/// Unchecked conversion used inside the solver; coefficients may be
/// non-finite while a trial point is being evaluated.
fn theta_from_slice(x: &[f64]) -> Theta {
    std::array::from_fn(|k| QuinticOdd {
        a1: x[3 * k],
        a3: x[3 * k + 1],
        a5: x[3 * k + 2],
    })
}

pub fn theta_from_vec(x: &[f64]) -> Result<Theta> {
    if x.len() != NUM_COEFFS {
        return Err(Error::Config(format!("expected {NUM_COEFFS} coefficients, got {}", x.len())));
    }
    let steps: Vec<QuinticOdd> = x
        .chunks(3)
        .map(|c| QuinticOdd::new(c[0], c[1], c[2]))
        .collect::<Result<_>>()?;
    Ok(std::array::from_fn(|k| steps[k]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub initial_loss: f64,
    /// `None` when the restart diverged.
    pub final_loss: Option<f64>,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub tau: f64,
    pub seed: u64,
    pub theta: Vec<QuinticOdd>,
    pub loss: f64,
    pub best_index: usize,
    pub restarts: Vec<RestartRecord>,
}

impl FitResult {
    pub fn restart_losses(&self) -> Vec<Option<f64>> {
        self.restarts.iter().map(|r| r.final_loss).collect()
    }

    pub fn theta_array(&self) -> Result<Theta> {
        theta_from_vec(&self.theta.iter().flat_map(|p| p.to_array()).collect::<Vec<_>>())
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        self.theta.iter().fold(sigma, |x, p| p.eval(x))
    }

    pub fn schedule(&self) -> Result<FilterSchedule> {
        FilterSchedule::new(self.theta.clone(), format!("lpmuon_tau{}", self.tau))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Starting point for restart `index`: the warm start itself for index 0,
/// otherwise the warm start plus Gaussian noise from stream `index`.
pub fn restart_init(cfg: &FitConfig, index: usize) -> Result<Vec<f64>> {
    let mut x = theta_to_vec(&warm_start());
    if index > 0 {
        let normal = Normal::new(0.0, cfg.perturb_std)
            .map_err(|e| Error::Config(format!("perturb_std: {e}")))?;
        let mut rng = stream(cfg.seed, index as u64);
        x.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    }
    Ok(x)
}

fn run_restart(cfg: &FitConfig, grid: &BandGrid, index: usize) -> Result<(RestartRecord, Vec<f64>)> {
    let x0 = restart_init(cfg, index)?;
    let objective = |x: &[f64]| fit_loss(&theta_from_slice(x), grid, cfg);
    let initial_loss = objective(&x0);
    let report = minimize(objective, &x0, &cfg.lbfgs());
    let diverged = !report.f.is_finite()
        || report.x.iter().any(|v| !v.is_finite() || v.abs() > cfg.divergence_bound);
    Ok((
        RestartRecord {
            index,
            initial_loss,
            final_loss: (!diverged).then_some(report.f),
            iterations: report.iterations,
            stop_reason: report.reason,
        },
        report.x,
    ))
}

/// Multi-restart fit. Restarts run on separate threads; the best restart is
/// the lowest loss, ties going to the lowest index.
pub fn fit(cfg: &FitConfig) -> Result<FitResult> {
    let grid = build_bands(cfg)?;
    let outcomes: Vec<Result<(RestartRecord, Vec<f64>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.restarts)
            .map(|i| {
                let grid = &grid;
                scope.spawn(move || run_restart(cfg, grid, i))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("restart thread panicked"))
            .collect()
    });
    let outcomes: Vec<(RestartRecord, Vec<f64>)> = outcomes.into_iter().collect::<Result<_>>()?;
    let mut best: Option<(usize, f64)> = None;
    for (rec, _) in &outcomes {
        if let Some(l) = rec.final_loss {
            if best.is_none_or(|(_, b)| l < b) {
                best = Some((rec.index, l));
            }
        }
    }
    let Some((best_index, loss)) = best else {
        let reasons: Vec<String> = outcomes
            .iter()
            .map(|(r, _)| format!("restart {}: {:?} after {} iterations", r.index, r.stop_reason, r.iterations))
            .collect();
        return Err(Error::FitFailure(format!(
            "all {} restarts diverged ({})",
            outcomes.len(),
            reasons.join("; ")
        )));
    };
    let theta = theta_from_vec(&outcomes[best_index].1)?;
    Ok(FitResult {
        tau: cfg.tau,
        seed: cfg.seed,
        theta: theta.to_vec(),
        loss,
        best_index,
        restarts: outcomes.into_iter().map(|(r, _)| r).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRow {
    pub tau: f64,
    pub theta: Theta,
    pub loss: f64,
}

pub fn reference_table() -> Result<Vec<ReferenceRow>> {
    let mut lines = REFERENCE_TABLE_CSV.lines();
    lines.next();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != NUM_COEFFS + 2 {
                return Err(Error::Parse(format!("reference row has {} fields", v.len())));
            }
            Ok(ReferenceRow {
                tau: v[0],
                theta: theta_from_vec(&v[1..=NUM_COEFFS])?,
                loss: v[NUM_COEFFS + 1],
            })
        })
        .collect()
}
