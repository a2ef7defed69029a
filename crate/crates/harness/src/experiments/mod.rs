//! Seeded synthetic experiments. Each returns its CSV table and a JSON
//! summary; both are pure functions of the configuration.

mod erank_demo;
mod filter_profile;
mod headvar;
mod lowrank;
mod lpmuon_fit;
mod quadratic;
mod record;

pub use erank_demo::run_erank_demo;
pub use filter_profile::{filter_profile, run_filter_profile, GRID_POINTS};
pub use headvar::{run_headvar_demo, HeadvarRow};
pub use lowrank::{run_lowrank_stream, signal_with_polar, StreamSummary};
pub use lpmuon_fit::run_lpmuon_fit;
pub use quadratic::run_noisy_quadratic;
pub use record::{records_to_csv, Metrics, RunRecord};

use pion::rng::{gaussian_matrix, Rng};
use pion::DenseMatrix;
use serde_json::Value;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::HarnessResult;
use crate::table::CsvTable;

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub table: CsvTable,
    pub summary: Value,
}

impl RunOutput {
    pub fn csv(&self) -> String {
        self.table.render()
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> HarnessResult<RunOutput> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::FilterProfile => run_filter_profile(cfg),
        ExperimentKind::LowrankStream => run_lowrank_stream(cfg).map(|(out, _)| out),
        ExperimentKind::NoisyQuadratic => run_noisy_quadratic(cfg),
        ExperimentKind::ErankDemo => run_erank_demo(cfg),
        ExperimentKind::HeadvarDemo => run_headvar_demo(cfg).map(|(out, _)| out),
        ExperimentKind::LpmuonFit => run_lpmuon_fit(cfg),
    }
}

/// `k` orthonormal columns by modified Gram–Schmidt on Gaussian draws.
pub fn orthonormal_columns(rng: &mut Rng, rows: usize, k: usize) -> DenseMatrix {
    assert!(k <= rows, "cannot fit {k} orthonormal columns in {rows} rows");
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    while cols.len() < k {
        let mut v = gaussian_matrix(rng, rows, 1, 1.0).into_vec();
        for _ in 0..2 {
            for q in &cols {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= d * y);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
    }
    DenseMatrix::from_fn(rows, k, |i, j| cols[j][i]).expect("finite basis")
}
