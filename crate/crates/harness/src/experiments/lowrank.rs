use std::time::Instant;

use pion::diagnostics::{empirical_snr, erank, frobenius_cosine};
use pion::optim::Optimizer;
use pion::rng::{gaussian_matrix, stream, Rng};
use pion::DenseMatrix;
use serde::Serialize;
use serde_json::json;

use super::{orthonormal_columns, records_to_csv, Metrics, RunOutput, RunRecord};
use crate::config::{optimizer_label, ExperimentConfig};
use crate::error::{HarnessError, HarnessResult};

const SIGNAL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StreamSummary {
    pub optimizer: String,
    pub mean_alignment: f64,
    pub mean_erank: f64,
}

/// Rank-`r` signal with equal singular values and unit Frobenius norm,
/// together with its polar factor.
pub fn signal_with_polar(rng: &mut Rng, rows: usize, cols: usize, rank: usize) -> (DenseMatrix, DenseMatrix) {
    let u = orthonormal_columns(rng, rows, rank);
    let v = orthonormal_columns(rng, cols, rank);
    let polar = u.matmul(&v.transpose()).expect("conforming factors");
    (polar.scale(1.0 / (rank as f64).sqrt()), polar)
}

pub fn run_lowrank_stream(cfg: &ExperimentConfig) -> HarnessResult<(RunOutput, Vec<StreamSummary>)> {
    cfg.validate()?;
    let opts = cfg.resolved_optimizers();
    let labels: Vec<String> = opts.iter().map(optimizer_label).collect();
    let noise = cfg.noise();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();

    let mut records = Vec::new();
    let mut snrs = Vec::new();
    for &seed in &seeds {
        let (signal, polar) = signal_with_polar(&mut stream(seed, SIGNAL_STREAM), cfg.rows, cfg.cols, cfg.rank);
        let mut noise_rng = stream(seed, NOISE_STREAM);
        let mut optimizers = opts
            .iter()
            .map(|o| Optimizer::new(o.clone(), (cfg.rows, cfg.cols)))
            .collect::<pion::Result<Vec<_>>>()?;
        let mut params = vec![DenseMatrix::zeros(cfg.rows, cfg.cols); opts.len()];
        let mut per_opt: Vec<Vec<RunRecord>> = vec![Vec::with_capacity(cfg.steps); opts.len()];
        let mut grads = Vec::with_capacity(cfg.steps);
        for step in 1..=cfg.steps {
            let grad = signal.add(&gaussian_matrix(&mut noise_rng, cfg.rows, cfg.cols, noise))?;
            for (k, opt) in optimizers.iter_mut().enumerate() {
                let start = Instant::now();
                let outcome = opt.step(&mut params[k], &grad)?;
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                if outcome.skipped() {
                    return Err(HarnessError::Failure(format!("{} skipped step {step}", labels[k])));
                }
                per_opt[k].push(RunRecord {
                    seed,
                    step,
                    series: labels[k].clone(),
                    metrics: Metrics {
                        alignment: Some(frobenius_cosine(&outcome.direction, &polar)?),
                        erank: Some(erank(&outcome.direction)?.erank),
                        ..Default::default()
                    },
                    wall_time_ms: cfg.record_wall_time.then_some(elapsed),
                });
            }
            grads.push(grad);
        }
        snrs.push(empirical_snr(&grads).map(|e| e.snr).ok());
        records.extend(per_opt.into_iter().flatten());
    }

    let summaries: Vec<StreamSummary> = labels
        .iter()
        .map(|label| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| &r.series == label).collect();
            let n = rows.len() as f64;
            StreamSummary {
                optimizer: label.clone(),
                mean_alignment: rows.iter().map(|r| r.metrics.alignment.unwrap_or(0.0)).sum::<f64>() / n,
                mean_erank: rows.iter().map(|r| r.metrics.erank.unwrap_or(0.0)).sum::<f64>() / n,
            }
        })
        .collect();
    let table = records_to_csv(&records)?;
    let summary = json!({
        "experiment": "lowrank_stream",
        "seeds": seeds,
        "noise_scale": noise,
        "gradient_snr": snrs,
        "optimizers": summaries,
    });
    Ok((RunOutput { table, summary }, summaries))
}
