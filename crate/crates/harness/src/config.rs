//! Experiment configuration loaded by `pion run`.

use std::path::{Path, PathBuf};

use pion::optim::{Algorithm, OptimizerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, HarnessResult};

/// Relative output paths are resolved under this directory when it is set.
pub const OUTPUT_DIR_ENV: &str = "PION_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FilterProfile,
    LowrankStream,
    NoisyQuadratic,
    ErankDemo,
    HeadvarDemo,
    LpmuonFit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::FilterProfile,
        ExperimentKind::LowrankStream,
        ExperimentKind::NoisyQuadratic,
        ExperimentKind::ErankDemo,
        ExperimentKind::HeadvarDemo,
        ExperimentKind::LpmuonFit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FilterProfile => "filter_profile",
            ExperimentKind::LowrankStream => "lowrank_stream",
            ExperimentKind::NoisyQuadratic => "noisy_quadratic",
            ExperimentKind::ErankDemo => "erank_demo",
            ExperimentKind::HeadvarDemo => "headvar_demo",
            ExperimentKind::LpmuonFit => "lpmuon_fit",
        }
    }
}

/// One layer of the heterogeneous-head fixture: each half angle yields a
/// pair of heads, and `sigma` is the layer's two-point spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeadLayerSpec {
    pub half_angles: Vec<f64>,
    pub sigma: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Optimizers under comparison; empty selects the experiment defaults.
    #[serde(default)]
    pub optimizers: Vec<OptimizerConfig>,
    #[serde(default = "default_dim")]
    pub rows: usize,
    #[serde(default = "default_dim")]
    pub cols: usize,
    /// Signal rank of the low-rank stream.
    #[serde(default = "default_rank")]
    pub rank: usize,
    /// Per-entry noise standard deviation; `None` selects the experiment default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Pion `k_p` columns of the filter profile; empty means 0..=5.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_p: Vec<usize>,
    /// Generator ranks of the erank demo; 0 is a pure-noise generator.
    #[serde(default = "default_generator_ranks")]
    pub generator_ranks: Vec<usize>,
    /// Largest-to-smallest eigenvalue ratio of the quadratic's SPD factor.
    #[serde(default = "default_condition")]
    pub condition: f64,
    #[serde(default = "default_layers")]
    pub layers: Vec<HeadLayerSpec>,
    /// Per-head Frobenius norms of the initial parameter.
    #[serde(default = "default_head_norms")]
    pub head_norms: Vec<f64>,
    /// Head count used by per-head Pion; `None` uses the fixture's heads.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_head_heads: Option<usize>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    /// Adds a wall-time column. Off by default because it breaks byte
    /// reproducibility of the output.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_dim() -> usize {
    32
}
fn default_rank() -> usize {
    2
}
fn default_steps() -> usize {
    200
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_generator_ranks() -> Vec<usize> {
    vec![24, 8, 2]
}
fn default_condition() -> f64 {
    4.0
}
fn default_layers() -> Vec<HeadLayerSpec> {
    vec![
        HeadLayerSpec { half_angles: vec![0.1, 0.5], sigma: (1.5, 1.0) },
        HeadLayerSpec { half_angles: vec![0.2, 0.7], sigma: (1.4, 1.0) },
        HeadLayerSpec { half_angles: vec![0.05, 0.3], sigma: (1.6, 1.0) },
    ]
}
fn default_head_norms() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}
fn default_taus() -> Vec<f64> {
    vec![0.5]
}

impl ExperimentConfig {
    /// Canonical configuration of each experiment.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            experiment: kind,
            optimizers: Vec::new(),
            rows: default_dim(),
            cols: default_dim(),
            rank: default_rank(),
            noise_scale: None,
            steps: default_steps(),
            seeds: default_seeds(),
            output: None,
            k_p: Vec::new(),
            generator_ranks: default_generator_ranks(),
            condition: default_condition(),
            layers: default_layers(),
            head_norms: default_head_norms(),
            per_head_heads: None,
            taus: default_taus(),
            record_wall_time: false,
        };
        match kind {
            ExperimentKind::LowrankStream => cfg.seeds = (0..10).collect(),
            ExperimentKind::NoisyQuadratic => {
                cfg.rows = 16;
                cfg.cols = 16;
                cfg.steps = 500;
                cfg.seeds = (0..3).collect();
            }
            ExperimentKind::ErankDemo => {
                cfg.steps = 50;
                cfg.seeds = (0..3).collect();
            }
            ExperimentKind::HeadvarDemo => {
                cfg.rows = 8;
                cfg.steps = 50;
            }
            _ => {}
        }
        cfg
    }

    pub fn from_json(text: &str) -> HarnessResult<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Usage(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Per-entry noise standard deviation after applying experiment defaults.
    pub fn noise(&self) -> f64 {
        self.noise_scale.unwrap_or(match self.experiment {
            ExperimentKind::LowrankStream => 0.05 / ((self.rows * self.cols) as f64).sqrt(),
            ExperimentKind::NoisyQuadratic => 1e-4,
            ExperimentKind::ErankDemo => 1e-3,
            _ => 0.0,
        })
    }

    /// Optimizers after applying experiment defaults.
    pub fn resolved_optimizers(&self) -> Vec<OptimizerConfig> {
        if !self.optimizers.is_empty() {
            return self.optimizers.clone();
        }
        match self.experiment {
            ExperimentKind::LowrankStream => vec![
                OptimizerConfig::muon(0.02),
                OptimizerConfig::pion(0.02, 2),
                OptimizerConfig::lrmuon(0.02, self.rank),
                OptimizerConfig::adamw(1e-3),
            ],
            ExperimentKind::NoisyQuadratic => vec![
                OptimizerConfig::adamw(0.01),
                OptimizerConfig::muon(0.01),
                OptimizerConfig::pion(0.01, 2),
            ],
            ExperimentKind::HeadvarDemo => vec![OptimizerConfig::pion(0.01, 2)],
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let bad = |msg: String| Err(HarnessError::Usage(msg));
        if self.seeds.is_empty() {
            return bad("seeds must be nonempty".into());
        }
        if self.steps == 0 {
            return bad("steps must be >= 1".into());
        }
        if self.rows == 0 || self.cols == 0 {
            return bad("shape must be nonempty".into());
        }
        if let Some(n) = self.noise_scale {
            if !(n.is_finite() && n >= 0.0) {
                return bad(format!("noise scale must be finite and >= 0, got {n}"));
            }
        }
        for opt in &self.optimizers {
            opt.validate()?;
        }
        let mut labels: Vec<String> = self.resolved_optimizers().iter().map(optimizer_label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return bad("optimizer labels must be unique".into());
        }
        match self.experiment {
            ExperimentKind::FilterProfile => {
                if let Some(k) = self.k_p.iter().find(|k| **k > 5) {
                    return bad(format!("k_p must be in 0..=5, got {k}"));
                }
            }
            ExperimentKind::LowrankStream => {
                if self.rank == 0 || self.rank >= self.rows.min(self.cols) {
                    return bad(format!(
                        "signal rank {} must be in 1..{}",
                        self.rank,
                        self.rows.min(self.cols)
                    ));
                }
            }
            ExperimentKind::NoisyQuadratic => {
                if !(self.condition.is_finite() && self.condition >= 1.0) {
                    return bad(format!("condition must be >= 1, got {}", self.condition));
                }
            }
            ExperimentKind::ErankDemo => {
                if self.generator_ranks.is_empty() {
                    return bad("generator_ranks must be nonempty".into());
                }
                if let Some(r) = self.generator_ranks.iter().find(|r| **r > self.rows.min(self.cols)) {
                    return bad(format!("generator rank {r} exceeds min shape"));
                }
            }
            ExperimentKind::HeadvarDemo => {
                if self.layers.is_empty() {
                    return bad("layers must be nonempty".into());
                }
                for layer in &self.layers {
                    let heads = 2 * layer.half_angles.len();
                    if heads != self.head_norms.len() {
                        return bad(format!("layer has {heads} heads but {} head norms", self.head_norms.len()));
                    }
                    if let Some(h) = self.per_head_heads {
                        if h == 0 || (2 * heads) % h != 0 {
                            return bad(format!("{} columns are not divisible into {h} heads", 2 * heads));
                        }
                    }
                }
                if self.head_norms.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
                    return bad("head norms must be finite and positive".into());
                }
                if self.rows < 2 {
                    return bad("headvar fixture needs rows >= 2".into());
                }
            }
            ExperimentKind::LpmuonFit => {
                if self.taus.is_empty() {
                    return bad("taus must be nonempty".into());
                }
            }
        }
        Ok(())
    }

    /// Output path after the default file name and the directory override.
    pub fn output_path(&self) -> PathBuf {
        let name = self.output.clone().unwrap_or_else(|| format!("{}.csv", self.experiment.name()));
        resolve_output(Path::new(&name))
    }
}

pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn optimizer_label(cfg: &OptimizerConfig) -> String {
    match cfg.algorithm {
        Algorithm::Adamw => "adamw".into(),
        Algorithm::Muon => "muon".into(),
        Algorithm::PionDefault => format!("pion_kp{}", cfg.k_p),
        Algorithm::PionPerHead => format!("pion_per_head_kp{}", cfg.k_p),
        Algorithm::Lrmuon => format!("lrmuon_k{}", cfg.rank.unwrap_or(0)),
        Algorithm::Lpmuon => match &cfg.schedule {
            Some(s) => s.label().to_string(),
            None => "lpmuon".into(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for kind in ExperimentKind::ALL {
            let cfg = ExperimentConfig::default_for(kind);
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "lowrank_stream", "seeds": [3]}"#).unwrap();
        assert_eq!((cfg.rows, cfg.cols, cfg.rank, cfg.steps), (32, 32, 2, 200));
        assert!((cfg.noise() - 0.05 / 32.0).abs() < 1e-18);
        assert_eq!(cfg.resolved_optimizers().len(), 4);
    }

    #[test]
    fn invariants_are_enforced() {
        let base = ExperimentConfig::default_for(ExperimentKind::LowrankStream);
        let cases = [
            ExperimentConfig { seeds: vec![], ..base.clone() },
            ExperimentConfig { steps: 0, ..base.clone() },
            ExperimentConfig { noise_scale: Some(-1.0), ..base.clone() },
            ExperimentConfig { rank: 32, ..base.clone() },
            ExperimentConfig { optimizers: vec![OptimizerConfig::muon(0.1), OptimizerConfig::muon(0.2)], ..base },
        ];
        for cfg in cases {
            assert!(matches!(cfg.validate(), Err(HarnessError::Usage(_))));
        }
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment": "lowrank_stream", "sed": [1]}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment": "training"}"#).is_err());
    }

    #[test]
    fn headvar_divisibility_is_checked() {
        let mut cfg = ExperimentConfig::default_for(ExperimentKind::HeadvarDemo);
        cfg.per_head_heads = Some(3);
        assert!(cfg.validate().is_err());
        cfg.per_head_heads = Some(1);
        cfg.validate().unwrap();
    }

    #[test]
    fn labels() {
        assert_eq!(optimizer_label(&OptimizerConfig::pion(0.1, 3)), "pion_kp3");
        assert_eq!(optimizer_label(&OptimizerConfig::lrmuon(0.1, 2)), "lrmuon_k2");
    }
}
