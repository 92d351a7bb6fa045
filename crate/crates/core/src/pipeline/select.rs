//! Checkpoint selection by dev-set correlation.

use std::path::PathBuf;

use crate::corpus::{Dataset, InputFormat};
use crate::error::{Error, Result};
use crate::eval::spearman;
use crate::model::load_checkpoint;

/// Ranks checkpoints by source-only Spearman correlation on the dev set,
/// descending, and keeps the top `k`. Ties break by path, lexicographically.
pub fn select_top_k(
    checkpoints: &[PathBuf],
    dev: &Dataset,
    k: usize,
) -> Result<Vec<(PathBuf, f64)>> {
    if dev.is_empty() {
        return Err(Error::Data("cannot select checkpoints on an empty dev set".into()));
    }
    if k > checkpoints.len() {
        return Err(Error::Data(format!(
            "cannot select top {k} out of {} checkpoints",
            checkpoints.len()
        )));
    }
    let gold = dev.scores()?;
    let mut ranked = Vec::with_capacity(checkpoints.len());
    for path in checkpoints {
        let state = load_checkpoint(path)?;
        let preds = state.predict(dev, InputFormat::Src)?;
        ranked.push((path.clone(), spearman(&preds, &gold)?));
    }
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("correlations are finite")
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(k);
    Ok(ranked)
}
