//! Minimal CSV emitter: comma separated, header row, LF endings, floats in
//! `{:.16e}`. Every field the harness writes is numeric or a bare label, so
//! no quoting is needed.

use pion::matrix::format_f64;

use crate::error::{HarnessError, HarnessResult};

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Formats a metric, refusing non-finite values.
pub fn num(x: f64, what: &str) -> HarnessResult<String> {
    if x.is_finite() {
        Ok(format_f64(x))
    } else {
        Err(HarnessError::Failure(format!("non-finite {what}: {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_and_rows_with_lf() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push(vec!["x".into(), num(0.5, "b").unwrap()]);
        assert_eq!(t.render(), "a,b\nx,5.0000000000000000e-1\n");
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn non_finite_metrics_abort() {
        assert!(matches!(num(f64::NAN, "loss"), Err(HarnessError::Failure(_))));
    }
}
