//! Correlation reports over datasets.
//!
//! Two modes: `per_lp` scores each language pair separately; `pooled`
//! scores the concatenation of all pairs at once, which is how multilingual
//! submissions are ranked.

use std::fmt;

use log::warn;
use serde::Serialize;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::eval::{kendall_b, pearson, spearman};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    PerLp,
    Pooled,
}

impl EvalMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "per_lp" | "per-lp" => Ok(EvalMode::PerLp),
            "pooled" => Ok(EvalMode::Pooled),
            other => Err(Error::Config(format!(
                "unknown evaluation mode '{other}' (expected per_lp|pooled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportEntry {
    /// Language pair, or "pooled".
    pub key: String,
    pub spearman: f64,
    pub pearson: f64,
    pub kendall_b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CorrelationReport {
    pub dataset_id: String,
    pub model_id: String,
    pub entries: Vec<ReportEntry>,
}

fn entry(key: String, predictions: &[f64], gold: &[f64]) -> Result<ReportEntry> {
    Ok(ReportEntry {
        key,
        spearman: spearman(predictions, gold)?,
        pearson: pearson(predictions, gold)?,
        kendall_b: kendall_b(predictions, gold)?,
        n: gold.len(),
    })
}

/// Correlates predictions against the dataset's gold scores.
///
/// Predictions are index-aligned with the dataset. In `per_lp` mode,
/// language pairs with fewer than two examples are skipped with a warning;
/// a report with no entries at all is an error.
pub fn evaluate(
    dataset: &Dataset,
    predictions: &[f64],
    mode: EvalMode,
    dataset_id: &str,
    model_id: &str,
) -> Result<CorrelationReport> {
    if predictions.len() != dataset.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} examples",
            predictions.len(),
            dataset.len()
        )));
    }
    let gold = dataset.scores()?;

    let mut entries = Vec::new();
    match mode {
        EvalMode::Pooled => {
            if gold.len() < 2 {
                return Err(Error::Data(
                    "pooled evaluation needs at least 2 examples".into(),
                ));
            }
            entries.push(entry("pooled".into(), predictions, &gold)?);
        }
        EvalMode::PerLp => {
            for (lp, count) in dataset.language_pairs() {
                if count < 2 {
                    warn!("skipping language pair {lp}: only {count} example(s)");
                    continue;
                }
                let indices: Vec<usize> = dataset
                    .examples
                    .iter()
                    .enumerate()
                    .filter(|(_, ex)| ex.lp == lp)
                    .map(|(i, _)| i)
                    .collect();
                let p: Vec<f64> = indices.iter().map(|&i| predictions[i]).collect();
                let g: Vec<f64> = indices.iter().map(|&i| gold[i]).collect();
                entries.push(entry(lp.to_string(), &p, &g)?);
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::Data(
            "evaluation produced no entries (every language pair was too small)".into(),
        ));
    }
    Ok(CorrelationReport {
        dataset_id: dataset_id.to_string(),
        model_id: model_id.to_string(),
        entries,
    })
}

impl CorrelationReport {
    /// Machine-readable TSV, one row per entry.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("key\tn\tspearman\tpearson\tkendall_b\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{:.6}\t{:.6}\n",
                e.key, e.n, e.spearman, e.pearson, e.kendall_b
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl fmt::Display for CorrelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dataset: {}  model: {}", self.dataset_id, self.model_id)?;
        writeln!(
            f,
            "{:<12} {:>6} {:>10} {:>10} {:>10}",
            "key", "n", "spearman", "pearson", "kendall_b"
        )?;
        for e in &self.entries {
            writeln!(
                f,
                "{:<12} {:>6} {:>10.4} {:>10.4} {:>10.4}",
                e.key, e.n, e.spearman, e.pearson, e.kendall_b
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, LanguagePair, Provenance};

    fn dataset(rows: &[(&str, f64)]) -> Dataset {
        let examples = rows
            .iter()
            .enumerate()
            .map(|(i, (lp, q))| Example {
                id: format!("e{i}"),
                lp: LanguagePair::parse(lp).unwrap(),
                src: "s".into(),
                hyp: "h".into(),
                reference: None,
                score: Some(*q),
            })
            .collect();
        Dataset::new(examples, Provenance::Test).unwrap()
    }

    #[test]
    fn single_pair_pooled_equals_per_lp() {
        let ds = dataset(&[("de-en", 1.0), ("de-en", 2.0), ("de-en", 3.0)]);
        let preds = [0.1, 0.5, 0.9];
        let pooled = evaluate(&ds, &preds, EvalMode::Pooled, "d", "m").unwrap();
        let per_lp = evaluate(&ds, &preds, EvalMode::PerLp, "d", "m").unwrap();
        assert_eq!(pooled.entries.len(), 1);
        assert_eq!(per_lp.entries.len(), 1);
        assert_eq!(pooled.entries[0].spearman, per_lp.entries[0].spearman);
        assert_eq!(per_lp.entries[0].key, "de-en");
    }

    /// Two pairs, each internally perfect, with gold ranges that cross the
    /// prediction ranges: pooled correlation collapses while both per-pair
    /// coefficients stay at 1.
    #[test]
    fn pooled_differs_from_per_lp_on_crossed_ranges() {
        let ds = dataset(&[
            ("de-en", 0.1),
            ("de-en", 0.2),
            ("de-en", 0.3),
            ("zh-en", 10.1),
            ("zh-en", 10.2),
            ("zh-en", 10.3),
        ]);
        // de-en predictions sit above zh-en's although its gold sits below.
        let preds = [0.8, 0.9, 1.0, 0.1, 0.2, 0.3];
        let per_lp = evaluate(&ds, &preds, EvalMode::PerLp, "d", "m").unwrap();
        assert_eq!(per_lp.entries.len(), 2);
        for e in &per_lp.entries {
            assert_eq!(e.spearman, 1.0);
        }
        let pooled = evaluate(&ds, &preds, EvalMode::Pooled, "d", "m").unwrap();
        assert!(pooled.entries[0].spearman < 0.9);
    }

    #[test]
    fn shuffling_example_order_leaves_the_report_unchanged() {
        let rows = [
            ("de-en", 1.0),
            ("de-en", 3.0),
            ("de-en", 2.0),
            ("zh-en", 0.5),
            ("zh-en", 0.7),
        ];
        let preds = [0.3, 0.9, 0.6, 0.2, 0.4];
        let base = evaluate(&dataset(&rows), &preds, EvalMode::PerLp, "d", "m").unwrap();

        let order = [4, 2, 0, 3, 1];
        let shuffled_rows: Vec<(&str, f64)> = order.iter().map(|&i| rows[i]).collect();
        let shuffled_preds: Vec<f64> = order.iter().map(|&i| preds[i]).collect();
        let shuffled = evaluate(
            &dataset(&shuffled_rows),
            &shuffled_preds,
            EvalMode::PerLp,
            "d",
            "m",
        )
        .unwrap();
        assert_eq!(base.entries, shuffled.entries);
    }

    #[test]
    fn tiny_language_pair_is_skipped_with_warning() {
        let ds = dataset(&[("de-en", 1.0), ("de-en", 2.0), ("zh-en", 1.0)]);
        let report = evaluate(&ds, &[0.1, 0.2, 0.3], EvalMode::PerLp, "d", "m").unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].key, "de-en");
    }

    #[test]
    fn report_with_no_entries_is_an_error() {
        let ds = dataset(&[("de-en", 1.0), ("zh-en", 1.0)]);
        assert!(evaluate(&ds, &[0.1, 0.2], EvalMode::PerLp, "d", "m").is_err());
    }

    #[test]
    fn misaligned_predictions_are_an_error() {
        let ds = dataset(&[("de-en", 1.0), ("de-en", 2.0)]);
        assert!(evaluate(&ds, &[0.1], EvalMode::Pooled, "d", "m").is_err());
    }

    #[test]
    fn serializations_contain_every_entry() {
        let ds = dataset(&[
            ("de-en", 1.0),
            ("de-en", 2.0),
            ("zh-en", 1.0),
            ("zh-en", 3.0),
        ]);
        let report = evaluate(&ds, &[0.1, 0.2, 0.3, 0.4], EvalMode::PerLp, "d", "m").unwrap();
        let tsv = report.to_tsv();
        assert!(tsv.contains("de-en") && tsv.contains("zh-en"));
        let json = report.to_json();
        assert!(json.contains("\"spearman\""));
        let table = report.to_string();
        assert!(table.contains("de-en"));
    }
}
