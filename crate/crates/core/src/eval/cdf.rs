//! Cumulative score-distribution reports.
//!
//! Summarizes how annotated scores distribute over their range — e.g. what
//! fraction of hypotheses score above a quality threshold — as a
//! two-column table ready for external plotting.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CdfReport {
    pub thresholds: Vec<f64>,
    /// Fraction of scores ≤ the matching threshold.
    pub fractions: Vec<f64>,
}

impl CdfReport {
    /// Two-column TSV with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("threshold\tfraction\n");
        for (t, f) in self.thresholds.iter().zip(&self.fractions) {
            out.push_str(&format!("{t}\t{f}\n"));
        }
        out
    }
}

/// Fraction of scores at or below each threshold. Thresholds must be
/// ascending.
pub fn cdf_report(scores: &[f64], thresholds: &[f64]) -> Result<CdfReport> {
    if scores.is_empty() {
        return Err(Error::Data("cdf report needs at least one score".into()));
    }
    if scores.iter().chain(thresholds).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("cdf inputs must be finite".into()));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Data("thresholds must be ascending".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len() as f64;
    let fractions = thresholds
        .iter()
        .map(|&t| sorted.partition_point(|&s| s <= t) as f64 / n)
        .collect();
    Ok(CdfReport {
        thresholds: thresholds.to_vec(),
        fractions,
    })
}
