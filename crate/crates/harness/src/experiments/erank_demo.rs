use pion::diagnostics::erank;
use pion::rng::{gaussian_matrix, stream};
use serde_json::json;

use super::{records_to_csv, Metrics, RunOutput, RunRecord};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, HarnessResult};

fn label(rank: usize) -> String {
    if rank == 0 {
        "noise".into()
    } else {
        format!("rank{rank}")
    }
}

/// Fresh `L R / √r` product of Gaussian factors each step, plus isotropic
/// noise; rank 0 is noise alone at unit scale.
pub fn run_erank_demo(cfg: &ExperimentConfig) -> HarnessResult<RunOutput> {
    cfg.validate()?;
    let (m, n) = (cfg.rows, cfg.cols);
    let noise = cfg.noise();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    // Pure noise is full rank, so it sorts first.
    let mut order: Vec<usize> = (0..cfg.generator_ranks.len()).collect();
    let effective = |r: usize| if r == 0 { m.min(n) + 1 } else { r };
    order.sort_by_key(|&i| std::cmp::Reverse(effective(cfg.generator_ranks[i])));

    let mut records = Vec::new();
    for &seed in &seeds {
        let mut series: Vec<Vec<RunRecord>> = vec![Vec::new(); cfg.generator_ranks.len()];
        for (g, &rank) in cfg.generator_ranks.iter().enumerate() {
            let mut rng = stream(seed, 10 + g as u64);
            for step in 1..=cfg.steps {
                let sample = if rank == 0 {
                    gaussian_matrix(&mut rng, m, n, 1.0)
                } else {
                    let l = gaussian_matrix(&mut rng, m, rank, 1.0);
                    let r = gaussian_matrix(&mut rng, rank, n, 1.0 / (rank as f64).sqrt());
                    l.matmul(&r)?.add(&gaussian_matrix(&mut rng, m, n, noise))?
                };
                series[g].push(RunRecord {
                    seed,
                    step,
                    series: label(rank),
                    metrics: Metrics { erank: Some(erank(&sample)?.erank), ..Default::default() },
                    wall_time_ms: None,
                });
            }
        }
        for step in 0..cfg.steps {
            for w in order.windows(2) {
                let (hi, lo) = (w[0], w[1]);
                if effective(cfg.generator_ranks[hi]) == effective(cfg.generator_ranks[lo]) {
                    continue;
                }
                let (a, b) = (series[hi][step].metrics.erank, series[lo][step].metrics.erank);
                if a <= b {
                    return Err(HarnessError::Failure(format!(
                        "erank ordering broken at seed {seed} step {}: {} {a:?} <= {} {b:?}",
                        step + 1,
                        label(cfg.generator_ranks[hi]),
                        label(cfg.generator_ranks[lo]),
                    )));
                }
            }
        }
        for g in &order {
            records.append(&mut series[*g]);
        }
    }

    let means: Vec<_> = order
        .iter()
        .map(|&g| {
            let name = label(cfg.generator_ranks[g]);
            let v: Vec<f64> = records.iter().filter(|r| r.series == name).filter_map(|r| r.metrics.erank).collect();
            json!({ "generator": name, "mean_erank": v.iter().sum::<f64>() / v.len() as f64 })
        })
        .collect();
    let table = records_to_csv(&records)?;
    Ok(RunOutput { table, summary: json!({ "experiment": "erank_demo", "generators": means }) })
}
