//! Per-parameter steppers sharing one heavy-ball momentum buffer.

mod adamw;
mod heads;
mod momentum;

pub use adamw::{adamw_step, AdamParams, AdamState};
pub use heads::{per_head_merge, per_head_split, rotated_head_fixture, HeadAxis, HeadLayout};
pub use momentum::{momentum_update, MomentumState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::spectral::{apply_filter, high_pass_schedule, FilterSchedule, DEFAULT_EPS, DEFAULT_PROMOTION_STEPS};
use crate::svd::{svd_compact, DEFAULT_RANK_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Adamw,
    Muon,
    PionDefault,
    PionPerHead,
    Lrmuon,
    Lpmuon,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Adamw => "adamw",
            Algorithm::Muon => "muon",
            Algorithm::PionDefault => "pion_default",
            Algorithm::PionPerHead => "pion_per_head",
            Algorithm::Lrmuon => "lrmuon",
            Algorithm::Lpmuon => "lpmuon",
        }
    }
}

fn default_mu() -> f64 {
    0.95
}

fn default_k_p() -> usize {
    DEFAULT_PROMOTION_STEPS
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_lr_scale() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub lr: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_k_p")]
    pub k_p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<FilterSchedule>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_layout: Option<HeadLayout>,
    #[serde(default)]
    pub adam: AdamParams,
    /// Multiplies `lr` for every algorithm.
    #[serde(default = "default_lr_scale")]
    pub lr_scale: f64,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, lr: f64) -> Self {
        OptimizerConfig {
            algorithm,
            lr,
            mu: default_mu(),
            k_p: default_k_p(),
            rank: None,
            schedule: None,
            eps: default_eps(),
            head_layout: None,
            adam: AdamParams::default(),
            lr_scale: 1.0,
        }
    }

    pub fn adamw(lr: f64) -> Self {
        Self::new(Algorithm::Adamw, lr)
    }

    pub fn muon(lr: f64) -> Self {
        Self::new(Algorithm::Muon, lr)
    }

    pub fn pion(lr: f64, k_p: usize) -> Self {
        OptimizerConfig {
            k_p,
            ..Self::new(Algorithm::PionDefault, lr)
        }
    }

    pub fn pion_per_head(lr: f64, k_p: usize, layout: HeadLayout) -> Self {
        OptimizerConfig {
            k_p,
            head_layout: Some(layout),
            ..Self::new(Algorithm::PionPerHead, lr)
        }
    }

    pub fn lrmuon(lr: f64, rank: usize) -> Self {
        OptimizerConfig {
            rank: Some(rank),
            ..Self::new(Algorithm::Lrmuon, lr)
        }
    }

    pub fn lpmuon(lr: f64, schedule: FilterSchedule) -> Self {
        OptimizerConfig {
            schedule: Some(schedule),
            ..Self::new(Algorithm::Lpmuon, lr)
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.lr_scale > 0.0 && self.lr_scale.is_finite()) {
            return Err(Error::Config(format!("lr_scale must be positive, got {}", self.lr_scale)));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be >= 0, got {}", self.eps)));
        }
        match self.algorithm {
            Algorithm::Adamw => self.adam.validate()?,
            Algorithm::Muon => momentum::check_mu(self.mu)?,
            Algorithm::PionDefault | Algorithm::PionPerHead => {
                momentum::check_mu(self.mu)?;
                high_pass_schedule(self.k_p)?;
                if self.algorithm == Algorithm::PionPerHead && self.head_layout.is_none() {
                    return Err(Error::Config("pion_per_head requires head_layout".into()));
                }
            }
            Algorithm::Lrmuon => {
                momentum::check_mu(self.mu)?;
                match self.rank {
                    Some(k) if k >= 1 => {}
                    _ => return Err(Error::Config("lrmuon requires rank >= 1".into())),
                }
            }
            Algorithm::Lpmuon => {
                momentum::check_mu(self.mu)?;
                if self.schedule.is_none() {
                    return Err(Error::Config("lpmuon requires a fitted schedule".into()));
                }
            }
        }
        if let Some(layout) = &self.head_layout {
            if layout.num_heads == 0 {
                return Err(Error::Config("num_heads must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: OptimizerConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn effective_lr(&self) -> f64 {
        self.lr * self.lr_scale
    }
}

/// What a single step did to the parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Update direction; the parameter moved by `−lr·lr_scale·direction`.
    pub direction: DenseMatrix,
    pub warning: Option<String>,
}

impl StepOutcome {
    pub fn skipped(&self) -> bool {
        self.warning.is_some() && self.direction.is_zero()
    }
}

fn zero_momentum_warning() -> String {
    "zero momentum; update skipped".to_string()
}

fn apply_direction(param: &mut DenseMatrix, cfg: &OptimizerConfig, dir: &DenseMatrix) -> Result<()> {
    param.axpy_in_place(-cfg.effective_lr(), dir)
}

/// Runs `filter` on the updated momentum, or skips the step when the
/// momentum is exactly zero.
fn filtered_step(
    param: &mut DenseMatrix,
    grad: &DenseMatrix,
    state: &mut MomentumState,
    cfg: &OptimizerConfig,
    filter: impl FnOnce(&DenseMatrix) -> Result<(DenseMatrix, Option<String>)>,
) -> Result<StepOutcome> {
    param.check_same_shape(&state.buffer, "step")?;
    let m = momentum_update(state, grad)?;
    if m.is_zero() {
        return Ok(StepOutcome {
            direction: DenseMatrix::zeros(m.rows(), m.cols()),
            warning: Some(zero_momentum_warning()),
        });
    }
    let (direction, warning) = filter(m)?;
    apply_direction(param, cfg, &direction)?;
    Ok(StepOutcome { direction, warning })
}

pub fn muon_step(
    param: &mut DenseMatrix,
    grad: &DenseMatrix,
    state: &mut MomentumState,
    cfg: &OptimizerConfig,
) -> Result<StepOutcome> {
    let schedule = FilterSchedule::muon();
    filtered_step(param, grad, state, cfg, |m| {
        Ok((apply_filter(m, &schedule, cfg.eps)?, None))
    })
}

pub fn pion_step(
    param: &mut DenseMatrix,
    grad: &DenseMatrix,
    state: &mut MomentumState,
    cfg: &OptimizerConfig,
) -> Result<StepOutcome> {
    let schedule = high_pass_schedule(cfg.k_p)?;
    match cfg.algorithm {
        Algorithm::PionPerHead => {
            let layout = cfg
                .head_layout
                .ok_or_else(|| Error::Config("pion_per_head requires head_layout".into()))?;
            layout.block_extent(param.shape())?;
            filtered_step(param, grad, state, cfg, |m| per_head_filter(m, &layout, &schedule, cfg.eps))
        }
        _ => filtered_step(param, grad, state, cfg, |m| {
            Ok((apply_filter(m, &schedule, cfg.eps)?, None))
        }),
    }
}

/// Each head block is normalized and filtered on its own; all-zero blocks
/// pass through as zero.
pub fn per_head_filter(
    m: &DenseMatrix,
    layout: &HeadLayout,
    schedule: &FilterSchedule,
    eps: f64,
) -> Result<(DenseMatrix, Option<String>)> {
    let mut zero_heads = Vec::new();
    let blocks = per_head_split(m, layout)?
        .into_iter()
        .enumerate()
        .map(|(h, b)| {
            if b.is_zero() {
                zero_heads.push(h);
                Ok(b)
            } else {
                apply_filter(&b, schedule, eps)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let warning = (!zero_heads.is_empty()).then(|| format!("zero momentum in heads {zero_heads:?}"));
    Ok((per_head_merge(&blocks, layout)?, warning))
}

pub fn lrmuon_step(
    param: &mut DenseMatrix,
    grad: &DenseMatrix,
    state: &mut MomentumState,
    cfg: &OptimizerConfig,
) -> Result<StepOutcome> {
    let k = match cfg.rank {
        Some(k) if k >= 1 => k,
        _ => return Err(Error::Config("lrmuon requires rank >= 1".into())),
    };
    filtered_step(param, grad, state, cfg, |m| {
        let svd = svd_compact(m, DEFAULT_RANK_TOL)?;
        Ok((svd.top_polar(k), None))
    })
}

pub fn lpmuon_step(
    param: &mut DenseMatrix,
    grad: &DenseMatrix,
    state: &mut MomentumState,
    cfg: &OptimizerConfig,
) -> Result<StepOutcome> {
    let schedule = cfg
        .schedule
        .as_ref()
        .ok_or_else(|| Error::Config("lpmuon requires a fitted schedule".into()))?;
    filtered_step(param, grad, state, cfg, |m| Ok((apply_filter(m, schedule, cfg.eps)?, None)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerState {
    Momentum(MomentumState),
    Adam(AdamState),
}

/// A configured stepper owning the state of one parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer {
    config: OptimizerConfig,
    state: OptimizerState,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, shape: (usize, usize)) -> Result<Self> {
        config.validate()?;
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::Config(format!("parameter shape {shape:?} has a zero dimension")));
        }
        if let (Algorithm::PionPerHead, Some(layout)) = (config.algorithm, &config.head_layout) {
            layout.block_extent(shape)?;
        }
        let state = match config.algorithm {
            Algorithm::Adamw => OptimizerState::Adam(AdamState::new(shape.0, shape.1)),
            _ => OptimizerState::Momentum(MomentumState::new(shape.0, shape.1, config.mu)?),
        };
        Ok(Optimizer { config, state })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn step(&mut self, param: &mut DenseMatrix, grad: &DenseMatrix) -> Result<StepOutcome> {
        let cfg = &self.config;
        match &mut self.state {
            OptimizerState::Adam(s) => {
                let direction = adamw_step(param, grad, s, cfg.effective_lr(), &cfg.adam)?;
                Ok(StepOutcome {
                    direction,
                    warning: None,
                })
            }
            OptimizerState::Momentum(s) => match cfg.algorithm {
                Algorithm::Muon => muon_step(param, grad, s, cfg),
                Algorithm::PionDefault | Algorithm::PionPerHead => pion_step(param, grad, s, cfg),
                Algorithm::Lrmuon => lrmuon_step(param, grad, s, cfg),
                Algorithm::Lpmuon => lpmuon_step(param, grad, s, cfg),
                Algorithm::Adamw => unreachable!("adamw always owns an Adam state"),
            },
        }
    }

    /// Optimizer state as JSON; matrices use the `{rows, cols, data}` form.
    pub fn checkpoint(&self) -> String {
        serde_json::to_string(&self.state).expect("state serializes")
    }

    pub fn restore(&mut self, json: &str) -> Result<()> {
        let state: OptimizerState =
            serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        let same_kind = matches!(
            (&self.state, &state),
            (OptimizerState::Adam(_), OptimizerState::Adam(_))
                | (OptimizerState::Momentum(_), OptimizerState::Momentum(_))
        );
        if !same_kind {
            return Err(Error::Config("checkpoint belongs to a different algorithm".into()));
        }
        self.state = state;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_matrix, stream};
    use crate::svd::msign_exact;

    fn cosine(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.frobenius_dot(b).unwrap() / (a.frobenius_norm() * b.frobenius_norm())
    }

    fn one_step(cfg: OptimizerConfig, momentum: &DenseMatrix) -> StepOutcome {
        let mut opt = Optimizer::new(cfg, momentum.shape()).unwrap();
        let mut p = DenseMatrix::zeros(momentum.rows(), momentum.cols());
        opt.step(&mut p, momentum).unwrap()
    }

    #[test]
    fn muon_on_positive_diagonal() {
        // Five NS steps send the normalized spectrum (0.832, 0.555) to about
        // (1.117, 0.682): near msign = I, inside the whitening band.
        let m = DenseMatrix::from_diag(&[3.0, 2.0]).unwrap();
        let mut opt = Optimizer::new(OptimizerConfig::muon(0.1), (2, 2)).unwrap();
        let mut p = DenseMatrix::zeros(2, 2);
        opt.step(&mut p, &m).unwrap();
        assert_eq!(msign_exact(&m).unwrap(), DenseMatrix::identity(2));
        for i in 0..2 {
            let step = -p.get(i, i) / 0.1;
            assert!((0.6..=1.4).contains(&step), "diagonal step {step}");
        }
        assert!(p.get(0, 1).abs() < 1e-15 && p.get(1, 0).abs() < 1e-15);
        assert!((-p.get(0, 0) / 0.1 - 1.117_093_2).abs() < 1e-6);
    }

    #[test]
    fn zero_momentum_is_a_noop() {
        for cfg in [
            OptimizerConfig::muon(0.1).with_eps(0.0),
            OptimizerConfig::pion(0.1, 2).with_eps(0.0),
            OptimizerConfig::lrmuon(0.1, 2),
        ] {
            let mut opt = Optimizer::new(cfg, (3, 2)).unwrap();
            let mut p = DenseMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64).unwrap();
            let before = p.clone();
            let out = opt.step(&mut p, &DenseMatrix::zeros(3, 2)).unwrap();
            assert_eq!(p, before);
            assert!(out.skipped());
        }
    }

    #[test]
    fn pion_prefers_the_signal_direction() {
        let mut rng = stream(7, 0);
        let u: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / 8f64.sqrt()).collect();
        let v: Vec<f64> = (0..8).map(|i| ((i + 1) as f64).sqrt()).collect();
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v: Vec<f64> = v.iter().map(|x| x / vn).collect();
        let signal = DenseMatrix::outer(&u, &v).unwrap();
        let noise = gaussian_matrix(&mut rng, 8, 8, 0.01);
        let m = signal.add(&noise).unwrap();
        let pion = one_step(OptimizerConfig::pion(1.0, 2), &m);
        let muon = one_step(OptimizerConfig::muon(1.0), &m);
        let c_pion = cosine(&pion.direction, &signal);
        let c_muon = cosine(&muon.direction, &signal);
        assert!(c_pion >= 0.99, "pion cosine {c_pion}");
        assert!(c_muon < c_pion, "muon {c_muon} vs pion {c_pion}");
    }

    #[test]
    fn single_head_matches_default_bitwise() {
        let mut rng = stream(3, 1);
        let grads: Vec<DenseMatrix> = (0..5).map(|_| gaussian_matrix(&mut rng, 6, 4, 1.0)).collect();
        let layout = HeadLayout::rows(1).unwrap();
        let mut a = Optimizer::new(OptimizerConfig::pion(0.02, 2), (6, 4)).unwrap();
        let mut b = Optimizer::new(OptimizerConfig::pion_per_head(0.02, 2, layout), (6, 4)).unwrap();
        let mut pa = DenseMatrix::zeros(6, 4);
        let mut pb = DenseMatrix::zeros(6, 4);
        for g in &grads {
            a.step(&mut pa, g).unwrap();
            b.step(&mut pb, g).unwrap();
        }
        assert_eq!(pa.as_slice(), pb.as_slice());
    }

    #[test]
    fn per_head_blocks_are_independent() {
        let layout = HeadLayout::rows(2).unwrap();
        let cfg = OptimizerConfig::pion_per_head(1.0, 2, layout);
        let mut rng = stream(11, 0);
        let m = gaussian_matrix(&mut rng, 4, 2, 1.0);
        let base = one_step(cfg.clone(), &m).direction;
        let schedule = high_pass_schedule(2).unwrap();
        for (h, block) in per_head_split(&m, &layout).unwrap().iter().enumerate() {
            let alone = apply_filter(block, &schedule, DEFAULT_EPS).unwrap();
            let got = &per_head_split(&base, &layout).unwrap()[h];
            assert!(got.sub(&alone).unwrap().max_abs() < 1e-15);
        }
        let mut perturbed = m.clone().into_vec();
        perturbed[0] += 5.0;
        let m2 = DenseMatrix::new(4, 2, perturbed).unwrap();
        let dir2 = one_step(cfg, &m2).direction;
        let b0 = per_head_split(&base, &layout).unwrap();
        let b2 = per_head_split(&dir2, &layout).unwrap();
        assert_ne!(b0[0], b2[0]);
        assert_eq!(b0[1], b2[1]);
    }

    #[test]
    fn per_head_rejects_indivisible_shape() {
        let cfg = OptimizerConfig::pion_per_head(0.1, 2, HeadLayout::rows(3).unwrap());
        assert!(matches!(Optimizer::new(cfg, (4, 4)), Err(Error::Config(_))));
    }

    #[test]
    fn lrmuon_top_one_and_clamp() {
        let m = DenseMatrix::from_diag(&[10.0, 1.0, 0.1]).unwrap();
        let d = one_step(OptimizerConfig::lrmuon(1.0, 1), &m).direction;
        let expected = DenseMatrix::from_diag(&[1.0, 0.0, 0.0]).unwrap();
        assert!(d.sub(&expected).unwrap().max_abs() < 1e-12);

        let x = [1.0, 2.0, 0.0, -1.0];
        let y = [0.5, -1.0, 3.0];
        let rank2 = DenseMatrix::outer(&x, &y)
            .unwrap()
            .add(&DenseMatrix::outer(&[0.0, 1.0, 1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap())
            .unwrap();
        let d = one_step(OptimizerConfig::lrmuon(1.0, 5), &rank2).direction;
        let exact = msign_exact(&rank2).unwrap();
        assert!(d.sub(&exact).unwrap().max_abs() < 1e-12);
        assert_eq!(svd_compact(&d, 1e-9).unwrap().rank(), 2);
    }

    #[test]
    fn lpmuon_uses_the_given_schedule() {
        let m = DenseMatrix::from_diag(&[0.8, 0.6]).unwrap();
        let d = one_step(OptimizerConfig::lpmuon(1.0, FilterSchedule::muon()), &m).direction;
        let muon = one_step(OptimizerConfig::muon(1.0), &m).direction;
        assert_eq!(d, muon);
        assert!(OptimizerConfig::new(Algorithm::Lpmuon, 1.0).validate().is_err());
    }

    #[test]
    fn lr_scale_multiplies_the_step() {
        let m = DenseMatrix::from_diag(&[2.0, 1.0]).unwrap();
        let mut cfg = OptimizerConfig::muon(0.1);
        cfg.lr_scale = 2.0;
        let mut opt = Optimizer::new(cfg, (2, 2)).unwrap();
        let mut p = DenseMatrix::zeros(2, 2);
        let out = opt.step(&mut p, &m).unwrap();
        assert_eq!(p, out.direction.scale(-0.2));
    }

    #[test]
    fn trajectories_are_deterministic() {
        let run = || {
            let mut rng = stream(42, 0);
            let mut opt = Optimizer::new(OptimizerConfig::pion(0.05, 2), (5, 3)).unwrap();
            let mut p = gaussian_matrix(&mut rng, 5, 3, 1.0);
            for _ in 0..10 {
                let g = gaussian_matrix(&mut rng, 5, 3, 1.0);
                opt.step(&mut p, &g).unwrap();
            }
            p
        };
        assert_eq!(run().as_slice(), run().as_slice());
    }

    #[test]
    fn heterogeneous_heads_separate_the_modes() {
        let (m, layout) = rotated_head_fixture(6, &[0.1, 0.5], (1.5, 1.0)).unwrap();
        let head_norms = |d: &DenseMatrix| -> Vec<f64> {
            per_head_split(d, &layout).unwrap().iter().map(|b| b.frobenius_norm()).collect()
        };
        let var = |xs: &[f64]| {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64, mean)
        };
        let default = one_step(OptimizerConfig::pion(1.0, 2), &m).direction;
        let per_head = one_step(OptimizerConfig::pion_per_head(1.0, 2, layout), &m).direction;
        let (v_default, mean_default) = var(&head_norms(&default));
        let (v_head, _) = var(&head_norms(&per_head));
        assert!(v_default <= 1e-10 * mean_default, "default variance {v_default}");
        assert!(v_head > 1e-3, "per-head variance {v_head}");
    }

    #[test]
    fn config_round_trip_and_validation() {
        let cfg = OptimizerConfig::pion_per_head(0.02, 3, HeadLayout::rows(4).unwrap());
        let back = OptimizerConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let minimal = OptimizerConfig::from_json(r#"{"algorithm":"muon","lr":0.02}"#).unwrap();
        assert_eq!(minimal, OptimizerConfig::muon(0.02));
        assert!(OptimizerConfig::from_json(r#"{"algorithm":"pion_per_head","lr":0.02}"#).is_err());
        assert!(OptimizerConfig::from_json(r#"{"algorithm":"lrmuon","lr":0.02,"rank":0}"#).is_err());
        assert!(OptimizerConfig::from_json(r#"{"algorithm":"muon","lr":-1}"#).is_err());
        assert!(OptimizerConfig::from_json(r#"{"algorithm":"sgd","lr":0.1}"#).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut opt = Optimizer::new(OptimizerConfig::muon(0.1), (2, 3)).unwrap();
        let mut p = DenseMatrix::zeros(2, 3);
        let g = DenseMatrix::from_fn(2, 3, |i, j| (i as f64) - (j as f64) + 0.5).unwrap();
        opt.step(&mut p, &g).unwrap();
        let saved = opt.checkpoint();
        let mut fresh = Optimizer::new(OptimizerConfig::muon(0.1), (2, 3)).unwrap();
        fresh.restore(&saved).unwrap();
        assert_eq!(fresh.state(), opt.state());
        let mut adam = Optimizer::new(OptimizerConfig::adamw(0.1), (2, 3)).unwrap();
        assert!(adam.restore(&saved).is_err());
    }
}
