//! Correlation metrics and evaluation reports.

mod cdf;
mod correlation;
mod report;

pub use cdf::{cdf_report, CdfReport};
pub use correlation::{kendall_b, pearson, spearman};
pub use report::{evaluate, CorrelationReport, EvalMode, ReportEntry};
