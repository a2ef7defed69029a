use serde::Serialize;

use crate::error::{HarnessError, HarnessResult};
use crate::table::{num, CsvTable};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub loss: Option<f64>,
    pub alignment: Option<f64>,
    pub erank: Option<f64>,
    pub snr: Option<f64>,
}

/// One step of one series (optimizer or generator) under one seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub step: usize,
    pub series: String,
    pub metrics: Metrics,
    pub wall_time_ms: Option<f64>,
}

impl RunRecord {
    pub fn check_finite(&self) -> HarnessResult<()> {
        let m = &self.metrics;
        for (name, v) in [("loss", m.loss), ("alignment", m.alignment), ("erank", m.erank), ("snr", m.snr)] {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(HarnessError::Failure(format!(
                        "non-finite {name} at seed {} step {} ({})",
                        self.seed, self.step, self.series
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Records become CSV rows ordered by (seed, series position, step); only
/// metric columns that some record fills are emitted.
pub fn records_to_csv(records: &[RunRecord]) -> HarnessResult<CsvTable> {
    type Getter = fn(&Metrics) -> Option<f64>;
    let all: [(&str, Getter); 4] = [
        ("loss", |m| m.loss),
        ("alignment", |m| m.alignment),
        ("erank", |m| m.erank),
        ("snr", |m| m.snr),
    ];
    let cols: Vec<(&str, Getter)> =
        all.into_iter().filter(|(_, g)| records.iter().any(|r| g(&r.metrics).is_some())).collect();
    let timed = records.iter().any(|r| r.wall_time_ms.is_some());

    let mut header = vec!["seed", "step", "series"];
    header.extend(cols.iter().map(|(n, _)| *n));
    if timed {
        header.push("wall_time_ms");
    }
    let mut table = CsvTable::new(header);
    let mut last: Option<(u64, &str, usize)> = None;
    for r in records {
        r.check_finite()?;
        if let Some((seed, series, step)) = last {
            if seed == r.seed && series == r.series && r.step <= step {
                return Err(HarnessError::Failure(format!("step index not monotone in {}", r.series)));
            }
        }
        last = Some((r.seed, &r.series, r.step));
        let mut row = vec![r.seed.to_string(), r.step.to_string(), r.series.clone()];
        for (name, g) in &cols {
            row.push(match g(&r.metrics) {
                Some(x) => num(x, name)?,
                None => String::new(),
            });
        }
        if timed {
            row.push(match r.wall_time_ms {
                Some(t) => num(t, "wall time")?,
                None => String::new(),
            });
        }
        table.push(row);
    }
    Ok(table)
}
