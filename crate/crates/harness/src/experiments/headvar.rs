use pion::diagnostics::population_variance;
use pion::optim::{per_head_merge, per_head_split, rotated_head_fixture, Algorithm, HeadLayout, Optimizer, OptimizerConfig};
use pion::rng::{gaussian_matrix, stream};
use pion::DenseMatrix;
use serde::Serialize;
use serde_json::json;

use super::RunOutput;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, HarnessResult};
use crate::table::{num, CsvTable};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeadvarRow {
    pub seed: u64,
    pub layer: usize,
    pub mode: &'static str,
    pub weight_norm_variance: f64,
    pub update_norm_variance: f64,
    pub update_norm_mean: f64,
}

fn head_norms(m: &DenseMatrix, layout: &HeadLayout) -> HarnessResult<Vec<f64>> {
    Ok(per_head_split(m, layout)?.iter().map(|b| b.frobenius_norm()).collect())
}

/// Initial parameter whose head blocks are Gaussian draws rescaled to the
/// requested norms.
fn heterogeneous_param(seed: u64, layer: usize, shape: (usize, usize), layout: &HeadLayout, norms: &[f64]) -> HarnessResult<DenseMatrix> {
    let mut rng = stream(seed, 100 + layer as u64);
    let blocks = per_head_split(&DenseMatrix::zeros(shape.0, shape.1), layout)?
        .iter()
        .zip(norms)
        .map(|(b, n)| {
            let g = gaussian_matrix(&mut rng, b.rows(), b.cols(), 1.0);
            g.scale(n / g.frobenius_norm())
        })
        .collect::<Vec<_>>();
    Ok(per_head_merge(&blocks, layout)?)
}

/// Default and per-head Pion on the rotated-head gradient stream of each
/// layer. The stream carries unequal head norms, but its two singular values
/// both sit in the saturated band of the whole-matrix filter.
pub fn run_headvar_demo(cfg: &ExperimentConfig) -> HarnessResult<(RunOutput, Vec<HeadvarRow>)> {
    cfg.validate()?;
    let base = cfg
        .resolved_optimizers()
        .into_iter()
        .find(|o| matches!(o.algorithm, Algorithm::PionDefault | Algorithm::PionPerHead))
        .ok_or_else(|| HarnessError::Usage("headvar_demo needs a Pion optimizer".into()))?;
    let noise = cfg.noise();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();

    let mut rows = Vec::new();
    for &seed in &seeds {
        for (l, spec) in cfg.layers.iter().enumerate() {
            let (grad, layout) = rotated_head_fixture(cfg.rows, &spec.half_angles, spec.sigma)?;
            let shape = grad.shape();
            let opt_layout = HeadLayout::new(cfg.per_head_heads.unwrap_or(layout.num_heads), layout.axis)?;
            let w0 = heterogeneous_param(seed, l, shape, &layout, &cfg.head_norms)?;
            let weight_var = population_variance(&head_norms(&w0, &layout)?);
            let modes = [
                ("default", OptimizerConfig { algorithm: Algorithm::PionDefault, head_layout: None, ..base.clone() }),
                ("per_head", OptimizerConfig { algorithm: Algorithm::PionPerHead, head_layout: Some(opt_layout), ..base.clone() }),
            ];
            let mut layer_rows = Vec::new();
            for (mode, opt_cfg) in modes {
                let mut opt = Optimizer::new(opt_cfg, shape)?;
                let mut w = w0.clone();
                let mut noise_rng = stream(seed, 200 + l as u64);
                for _ in 0..cfg.steps {
                    let g = grad.add(&gaussian_matrix(&mut noise_rng, shape.0, shape.1, noise))?;
                    opt.step(&mut w, &g)?;
                }
                let norms = head_norms(&w.sub(&w0)?, &layout)?;
                layer_rows.push(HeadvarRow {
                    seed,
                    layer: l,
                    mode,
                    weight_norm_variance: weight_var,
                    update_norm_variance: population_variance(&norms),
                    update_norm_mean: norms.iter().sum::<f64>() / norms.len() as f64,
                });
            }
            let single = opt_layout.num_heads == 1;
            if !single && layer_rows[1].update_norm_variance <= layer_rows[0].update_norm_variance {
                return Err(HarnessError::Failure(format!(
                    "layer {l} seed {seed}: per-head variance {} does not exceed default {}",
                    layer_rows[1].update_norm_variance, layer_rows[0].update_norm_variance
                )));
            }
            rows.extend(layer_rows);
        }
    }

    let mut table = CsvTable::new(["seed", "layer", "mode", "weight_norm_variance", "update_norm_variance", "update_norm_mean"]);
    for r in &rows {
        table.push(vec![
            r.seed.to_string(),
            r.layer.to_string(),
            r.mode.to_string(),
            num(r.weight_norm_variance, "weight variance")?,
            num(r.update_norm_variance, "update variance")?,
            num(r.update_norm_mean, "update mean")?,
        ]);
    }
    let summary = json!({ "experiment": "headvar_demo", "rows": rows });
    Ok((RunOutput { table, summary }, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    #[test]
    fn default_mode_is_flat_and_per_head_is_not() {
        let (out, rows) = run_headvar_demo(&ExperimentConfig::default_for(ExperimentKind::HeadvarDemo)).unwrap();
        assert_eq!(out.table.len(), 3 * 2);
        for pair in rows.chunks(2) {
            let (d, p) = (&pair[0], &pair[1]);
            assert_eq!((d.mode, p.mode), ("default", "per_head"));
            assert!(d.update_norm_variance <= 1e-10 * d.update_norm_mean);
            assert!(p.update_norm_variance > 0.0);
            assert!(d.weight_norm_variance > 1.0);
        }
    }

    #[test]
    fn single_head_modes_coincide() {
        let cfg = ExperimentConfig {
            per_head_heads: Some(1),
            ..ExperimentConfig::default_for(ExperimentKind::HeadvarDemo)
        };
        let (_, rows) = run_headvar_demo(&cfg).unwrap();
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].update_norm_variance, pair[1].update_norm_variance);
            assert_eq!(pair[0].update_norm_mean, pair[1].update_norm_mean);
        }
    }

    #[test]
    fn head_norms_are_applied() {
        let layout = HeadLayout::cols(4).unwrap();
        let w = heterogeneous_param(0, 0, (8, 8), &layout, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let n = head_norms(&w, &layout).unwrap();
        for (a, b) in n.iter().zip([1.0, 2.0, 4.0, 8.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
