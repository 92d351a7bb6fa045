//! Prediction ensembling.
//!
//! Members trained with different seeds or encoder presets predict on
//! incompatible scales, so each member's predictions are z-normalized over
//! the dataset before averaging. With one member this is a strictly
//! increasing transform and preserves the ranking exactly.

use std::path::PathBuf;

use crate::corpus::{Dataset, InputFormat};
use crate::error::{Error, Result};
use crate::model::{load_checkpoint, ModelState};
use crate::stats::z_scores;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationRule {
    /// Z-normalize each member's predictions (population std), then average.
    ZMean,
}

impl CombinationRule {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "z-mean" => Ok(CombinationRule::ZMean),
            other => Err(Error::Config(format!(
                "unknown combination rule '{other}' (available: z-mean)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub members: Vec<PathBuf>,
    pub rule: CombinationRule,
}

/// Loads every member checkpoint and combines their source-only predictions.
pub fn ensemble_predict(spec: &EnsembleSpec, dataset: &Dataset) -> Result<Vec<f64>> {
    if spec.members.is_empty() {
        return Err(Error::Data("ensemble needs at least one member".into()));
    }
    let mut states = Vec::with_capacity(spec.members.len());
    for path in &spec.members {
        let state = load_checkpoint(path).map_err(|e| {
            Error::Data(format!("ensemble member '{}': {e}", path.display()))
        })?;
        states.push(state);
    }
    ensemble_predict_states(&states, dataset, spec.rule)
}

/// Combines already-loaded members.
pub fn ensemble_predict_states(
    members: &[ModelState],
    dataset: &Dataset,
    rule: CombinationRule,
) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::Data("ensemble needs at least one member".into()));
    }
    let CombinationRule::ZMean = rule;
    let mut combined = vec![0.0; dataset.len()];
    for state in members {
        let preds = state.predict(dataset, InputFormat::Src)?;
        for (c, z) in combined.iter_mut().zip(z_scores(&preds)) {
            *c += z;
        }
    }
    let inv = 1.0 / members.len() as f64;
    for c in &mut combined {
        *c *= inv;
    }
    Ok(combined)
}
