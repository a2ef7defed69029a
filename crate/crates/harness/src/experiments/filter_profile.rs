use pion::spectral::{high_pass_schedule, FilterSchedule};
use pion::QuinticOdd;
use serde_json::json;

use super::RunOutput;
use crate::config::ExperimentConfig;
use crate::error::HarnessResult;
use crate::table::{num, CsvTable};

pub const GRID_POINTS: usize = 1001;

/// Filter responses on the σ grid of [0, 1]: t-fold Muon NS, Promotion and
/// Suppression for t = 1..5, then the requested Pion schedules.
pub fn filter_profile(k_p: &[usize]) -> HarnessResult<CsvTable> {
    let mut columns: Vec<(String, FilterSchedule)> = Vec::new();
    for (name, poly) in [
        ("muon_ns", QuinticOdd::MUON_NS),
        ("promotion", QuinticOdd::promotion()),
        ("suppression", QuinticOdd::suppression()),
    ] {
        for t in 1..=5 {
            let label = format!("{name}_t{t}");
            columns.push((label.clone(), FilterSchedule::repeated(poly, t, label)?));
        }
    }
    let k_p: Vec<usize> = if k_p.is_empty() { (0..=5).collect() } else { k_p.to_vec() };
    for k in k_p {
        columns.push((format!("pion_kp{k}"), high_pass_schedule(k)?));
    }

    let mut table = CsvTable::new(std::iter::once("sigma".to_string()).chain(columns.iter().map(|c| c.0.clone())));
    for i in 0..GRID_POINTS {
        let sigma = i as f64 / (GRID_POINTS - 1) as f64;
        let mut row = vec![num(sigma, "sigma")?];
        for (name, s) in &columns {
            row.push(num(s.eval(sigma), name)?);
        }
        table.push(row);
    }
    Ok(table)
}

pub fn run_filter_profile(cfg: &ExperimentConfig) -> HarnessResult<RunOutput> {
    let table = filter_profile(&cfg.k_p)?;
    let summary = json!({ "experiment": "filter_profile", "rows": table.len(), "columns": table.header() });
    Ok(RunOutput { table, summary })
}
