//! Recomputes the published metric table from the published confusion counts.

use serde::{Deserialize, Serialize};

use super::metrics::{summarize_metrics, ConfusionMatrix};
use crate::error::{Error, Result};

pub const PAPER_TABLES_JSON: &str = include_str!("../../../../assets/paper_tables.json");

/// Allowed gap, in percentage points, between a recomputed figure rounded to
/// three decimals and the printed one.
pub const PAPER_TOLERANCE: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperMetrics {
    pub f1: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

impl PaperMetrics {
    pub fn fields(&self) -> [(&'static str, f64); 4] {
        [
            ("f1", self.f1),
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRow {
    pub model: String,
    pub tp: u64,
    pub fn_printed: u64,
    pub fp_printed: u64,
    pub tn: u64,
    pub expected: PaperMetrics,
}

/// How the two middle columns of the printed confusion table are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnReading {
    /// Printed "False Negative" holds FP and printed "False Positive" holds FN.
    Swapped,
    Literal,
}

impl PaperRow {
    pub fn confusion(&self, reading: ColumnReading) -> ConfusionMatrix {
        match reading {
            ColumnReading::Swapped => ConfusionMatrix::new(self.tp, self.fp_printed, self.fn_printed, self.tn),
            ColumnReading::Literal => ConfusionMatrix::new(self.tp, self.fn_printed, self.fp_printed, self.tn),
        }
    }
}

pub fn parse_paper_rows(text: &str) -> Result<Vec<PaperRow>> {
    let rows: Vec<PaperRow> =
        serde_json::from_str(text).map_err(|e| Error::Asset(format!("reference table fixture: {e}")))?;
    if rows.len() != 19 {
        return Err(Error::Asset(format!("reference table fixture has {} rows, expected 19", rows.len())));
    }
    if rows.iter().any(|r| r.tp + r.fn_printed + r.fp_printed + r.tn == 0) {
        return Err(Error::Asset("reference table fixture has an empty row".into()));
    }
    Ok(rows)
}

pub fn paper_rows() -> Result<Vec<PaperRow>> {
    parse_paper_rows(PAPER_TABLES_JSON)
}

/// Percentage rounded half away from zero to three decimals.
pub fn percent3(x: f64) -> f64 {
    (x * 100_000.0).round() / 1000.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub model: String,
    pub computed: PaperMetrics,
    pub expected: PaperMetrics,
    /// Names of the figures outside tolerance.
    pub mismatches: Vec<&'static str>,
}

impl RowCheck {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaperCheck {
    pub rows: Vec<RowCheck>,
}

impl PaperCheck {
    pub fn n_matched(&self) -> usize {
        self.rows.iter().filter(|r| r.matches()).count()
    }

    pub fn all_match(&self) -> bool {
        self.n_matched() == self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let status = if r.matches() { "ok  " } else { "DIFF" };
            out.push_str(&format!("{status} {}\n", r.model));
            for ((name, got), (_, want)) in r.computed.fields().iter().zip(r.expected.fields()) {
                let flag = if r.mismatches.contains(name) { "  <--" } else { "" };
                out.push_str(&format!(
                    "     {name:<9} computed {got:>7.3}  printed {want:>7.3}  delta {:+.3}{flag}\n",
                    got - want
                ));
            }
        }
        out.push_str(&format!("{}/{} rows reproduced\n", self.n_matched(), self.rows.len()));
        out
    }
}

pub fn check_rows(rows: &[PaperRow], reading: ColumnReading) -> PaperCheck {
    let rows = rows
        .iter()
        .map(|row| {
            let m = summarize_metrics(&row.confusion(reading));
            let computed = PaperMetrics {
                f1: percent3(m.f1_pos),
                accuracy: percent3(m.accuracy),
                precision: percent3(m.macro_precision),
                recall: percent3(m.macro_recall),
            };
            let mismatches = computed
                .fields()
                .iter()
                .zip(row.expected.fields())
                .filter(|((_, got), (_, want))| (got - want).abs() > PAPER_TOLERANCE + 1e-9)
                .map(|((name, _), _)| *name)
                .collect();
            RowCheck {
                model: row.model.clone(),
                computed,
                expected: row.expected,
                mismatches,
            }
        })
        .collect();
    PaperCheck { rows }
}

pub fn reproduce_paper_tables(reading: ColumnReading) -> Result<PaperCheck> {
    Ok(check_rows(&paper_rows()?, reading))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_loads() {
        let rows = paper_rows().unwrap();
        assert_eq!(rows.len(), 19);
        let gnb = rows.iter().find(|r| r.model == "Gaussian Naive Bayes").unwrap();
        assert_eq!(gnb.tp + gnb.fn_printed + gnb.fp_printed + gnb.tn, 601);
    }

    #[test]
    fn rounding() {
        assert_eq!(percent3(0.909488), 90.949);
    }

    #[test]
    fn corrupt_fixture() {
        assert!(matches!(parse_paper_rows("[]"), Err(Error::Asset(_))));
        assert!(matches!(parse_paper_rows("{"), Err(Error::Asset(_))));
    }
}
