use pion::lpmuon::{fit, FitConfig, FitResult, NUM_COEFFS};
use serde_json::json;

use super::RunOutput;
use crate::config::ExperimentConfig;
use crate::error::HarnessResult;
use crate::table::{num, CsvTable};

pub fn run_lpmuon_fit(cfg: &ExperimentConfig) -> HarnessResult<RunOutput> {
    cfg.validate()?;
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    let mut header = vec!["tau".to_string(), "seed".into(), "loss".into(), "best_index".into()];
    header.extend((1..=5).flat_map(|t| [1, 3, 5].map(|p| format!("a{p}_{t}"))));
    debug_assert_eq!(header.len(), 4 + NUM_COEFFS);
    let mut table = CsvTable::new(header);
    let mut fits: Vec<FitResult> = Vec::new();
    for &tau in &cfg.taus {
        for &seed in &seeds {
            let result = fit(&FitConfig::new(tau, seed))?;
            let mut row = vec![num(tau, "tau")?, seed.to_string(), num(result.loss, "loss")?, result.best_index.to_string()];
            for p in &result.theta {
                for c in p.to_array() {
                    row.push(num(c, "coefficient")?);
                }
            }
            table.push(row);
            fits.push(result);
        }
    }
    let summary = json!({ "experiment": "lpmuon_fit", "fits": fits });
    Ok(RunOutput { table, summary })
}
