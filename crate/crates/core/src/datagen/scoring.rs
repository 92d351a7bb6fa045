//! Pseudo-labeling with one or more scorers.
//!
//! A [`Scorer`] assigns a quality score to an example; trained checkpoints
//! are the usual scorers, with a lexical-overlap scorer available to
//! bootstrap a fresh setup that has no checkpoints yet. [`label`] runs a
//! panel of scorers over a dataset and collects a [`ScoreMatrix`] for
//! rank-based aggregation.

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::{build_input, tokenize, Dataset, Example, InputFormat};
use crate::error::{Error, Result};
use crate::model::{load_checkpoint, ModelState};

pub trait Scorer {
    fn name(&self) -> String;
    fn score(&self, example: &Example, format: InputFormat) -> Result<f64>;
}

/// Raw predictions of M scorers over N examples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    ids: Vec<String>,
    scorer_names: Vec<String>,
    /// Row-major N×M.
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(ids: Vec<String>, scorer_names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if scorer_names.is_empty() {
            return Err(Error::Data("score matrix needs at least one scorer".into()));
        }
        if values.len() != ids.len() * scorer_names.len() {
            return Err(Error::Data(format!(
                "score matrix shape mismatch: {} ids x {} scorers != {} values",
                ids.len(),
                scorer_names.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = (bad / scorer_names.len(), bad % scorer_names.len());
            return Err(Error::Numeric(format!(
                "non-finite score from scorer '{}' on example '{}'",
                scorer_names[j], ids[i]
            )));
        }
        Ok(ScoreMatrix {
            ids,
            scorer_names,
            values,
        })
    }

    pub fn n_examples(&self) -> usize {
        self.ids.len()
    }

    pub fn n_scorers(&self) -> usize {
        self.scorer_names.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn scorer_names(&self) -> &[String] {
        &self.scorer_names
    }

    pub fn get(&self, example: usize, scorer: usize) -> f64 {
        self.values[example * self.n_scorers() + scorer]
    }

    pub fn column(&self, scorer: usize) -> Vec<f64> {
        (0..self.n_examples()).map(|i| self.get(i, scorer)).collect()
    }
}

/// Scores every example with every scorer; `values[i][j]` is scorer `j` on
/// example `i`. Non-finite outputs error, naming the scorer and example.
pub fn label(dataset: &Dataset, scorers: &[Box<dyn Scorer>], format: InputFormat) -> Result<ScoreMatrix> {
    if scorers.is_empty() {
        return Err(Error::Data("labeling needs at least one scorer".into()));
    }
    let mut values = Vec::with_capacity(dataset.len() * scorers.len());
    for ex in &dataset.examples {
        for scorer in scorers {
            let v = scorer.score(ex, format)?;
            if !v.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite score from scorer '{}' on example '{}'",
                    scorer.name(),
                    ex.id
                )));
            }
            values.push(v);
        }
    }
    ScoreMatrix::new(
        dataset.examples.iter().map(|e| e.id.clone()).collect(),
        scorers.iter().map(|s| s.name()).collect(),
        values,
    )
}

/// Token recall of the reference in the hypothesis: the fraction of
/// reference tokens (with multiplicity) that survive in the hypothesis.
/// A checkpoint-free stand-in for a trained scorer.
#[derive(Debug, Default, Clone, Copy)]
pub struct OverlapScorer;

impl Scorer for OverlapScorer {
    fn name(&self) -> String {
        "overlap".into()
    }

    fn score(&self, example: &Example, _format: InputFormat) -> Result<f64> {
        let reference = example.reference.as_deref().ok_or_else(|| {
            Error::Data(format!(
                "example '{}' has no reference; the overlap scorer needs one",
                example.id
            ))
        })?;
        let ref_tokens = tokenize(reference);
        if ref_tokens.is_empty() {
            return Err(Error::Data(format!(
                "example '{}' has an empty reference",
                example.id
            )));
        }
        let mut budget: HashMap<&str, usize> = HashMap::new();
        for t in &ref_tokens {
            *budget.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut hits = 0usize;
        for t in tokenize(&example.hyp) {
            if let Some(n) = budget.get_mut(t.as_str()) {
                if *n > 0 {
                    *n -= 1;
                    hits += 1;
                }
            }
        }
        Ok(hits as f64 / ref_tokens.len() as f64)
    }
}

/// A trained model used as a scorer.
pub struct CheckpointScorer {
    name: String,
    state: ModelState,
}

impl CheckpointScorer {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(CheckpointScorer {
            name: path.display().to_string(),
            state: load_checkpoint(path)?,
        })
    }

    pub fn from_state(name: impl Into<String>, state: ModelState) -> Self {
        CheckpointScorer {
            name: name.into(),
            state,
        }
    }
}

impl Scorer for CheckpointScorer {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn score(&self, example: &Example, format: InputFormat) -> Result<f64> {
        let seq = build_input(example, format, &self.state.vocabulary())?;
        self.state.forward(&seq)
    }
}
