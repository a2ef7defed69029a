use std::time::Instant;

use pion::optim::Optimizer;
use pion::rng::{gaussian_matrix, stream};
use pion::DenseMatrix;
use serde_json::json;

use super::{orthonormal_columns, records_to_csv, Metrics, RunOutput, RunRecord};
use crate::config::{optimizer_label, ExperimentConfig};
use crate::error::HarnessResult;

const PROBLEM_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// `½‖A(Θ − Θ*)‖²_F` with `A = Q diag(λ) Qᵀ`, λ evenly spaced in `[1, κ]`.
struct Quadratic {
    a: DenseMatrix,
    a_sq: DenseMatrix,
    target: DenseMatrix,
}

impl Quadratic {
    fn new(cfg: &ExperimentConfig, seed: u64) -> Self {
        let mut rng = stream(seed, PROBLEM_STREAM);
        let n = cfg.rows;
        let q = orthonormal_columns(&mut rng, n, n);
        let lambdas: Vec<f64> = (0..n)
            .map(|i| if n == 1 { 1.0 } else { 1.0 + (cfg.condition - 1.0) * i as f64 / (n - 1) as f64 })
            .collect();
        let a = q
            .matmul(&DenseMatrix::from_diag(&lambdas).expect("finite eigenvalues"))
            .and_then(|x| x.matmul(&q.transpose()))
            .expect("square factors");
        let a_sq = a.matmul(&a).expect("square");
        let t = gaussian_matrix(&mut rng, n, cfg.cols, 1.0);
        let target = t.scale(1.0 / t.frobenius_norm());
        Quadratic { a, a_sq, target }
    }

    fn loss(&self, theta: &DenseMatrix) -> f64 {
        let r = self.a.matmul(&theta.sub(&self.target).expect("shape")).expect("shape");
        0.5 * r.frobenius_norm().powi(2)
    }

    fn gradient(&self, theta: &DenseMatrix) -> DenseMatrix {
        self.a_sq.matmul(&theta.sub(&self.target).expect("shape")).expect("shape")
    }
}

pub fn run_noisy_quadratic(cfg: &ExperimentConfig) -> HarnessResult<RunOutput> {
    cfg.validate()?;
    let opts = cfg.resolved_optimizers();
    let noise = cfg.noise();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();

    let mut records = Vec::new();
    let mut finals = Vec::new();
    for &seed in &seeds {
        let problem = Quadratic::new(cfg, seed);
        for (k, o) in opts.iter().enumerate() {
            let label = optimizer_label(o);
            let mut opt = Optimizer::new(o.clone(), (cfg.rows, cfg.cols))?;
            let mut theta = DenseMatrix::zeros(cfg.rows, cfg.cols);
            // Each optimizer sees the same noise sequence.
            let mut noise_rng = stream(seed, NOISE_STREAM);
            let mut loss = problem.loss(&theta);
            for step in 1..=cfg.steps {
                let start = Instant::now();
                let g = problem.gradient(&theta).add(&gaussian_matrix(&mut noise_rng, cfg.rows, cfg.cols, noise))?;
                opt.step(&mut theta, &g)?;
                loss = problem.loss(&theta);
                records.push(RunRecord {
                    seed,
                    step,
                    series: label.clone(),
                    metrics: Metrics { loss: Some(loss), ..Default::default() },
                    wall_time_ms: cfg.record_wall_time.then(|| start.elapsed().as_secs_f64() * 1e3),
                });
            }
            finals.push(json!({ "seed": seed, "optimizer": label, "index": k, "final_loss": loss }));
        }
    }
    let table = records_to_csv(&records)?;
    let summary = json!({ "experiment": "noisy_quadratic", "noise_scale": noise, "final": finals });
    Ok(RunOutput { table, summary })
}
