//! Staged training orchestration.
//!
//! Training proceeds through up to four stages — synthetic pretraining, DA
//! fine-tuning, MQM fine-tuning, and a final dev-set fine-tune — each
//! consuming a dataset of matching provenance and emitting a checkpoint
//! stamped with the stage and data identity. Checkpoint selection,
//! cross-validation, and ensembling live in submodules.

mod cv;
mod ensemble;
mod select;

pub use cv::{final_finetune, kfold_cv, kfold_folds, CvOptions, CvResult, HyperPoint};
pub use ensemble::{ensemble_predict, ensemble_predict_states, CombinationRule, EnsembleSpec};
pub use select::select_top_k;

use std::fmt;
use std::path::{Path, PathBuf};

use crate::corpus::{Dataset, InputFormat, Provenance};
use crate::error::{Error, Result};
use crate::model::{
    save_checkpoint, train_epoch, FormatAssignment, ModelState, TrainOptions,
};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Pretrain,
    FinetuneDa,
    FinetuneMqm,
    FinetuneDev,
}

impl StageKind {
    pub const ALL: [StageKind; 4] = [
        StageKind::Pretrain,
        StageKind::FinetuneDa,
        StageKind::FinetuneMqm,
        StageKind::FinetuneDev,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StageKind::Pretrain => "pretrain",
            StageKind::FinetuneDa => "finetune_da",
            StageKind::FinetuneMqm => "finetune_mqm",
            StageKind::FinetuneDev => "finetune_dev",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown stage '{s}' (expected pretrain|finetune_da|finetune_mqm|finetune_dev)"
                ))
            })
    }

    /// The dataset provenance this stage trains on.
    pub fn expected_provenance(&self) -> Provenance {
        match self {
            StageKind::Pretrain => Provenance::Synthetic,
            StageKind::FinetuneDa => Provenance::Da,
            StageKind::FinetuneMqm => Provenance::Mqm,
            StageKind::FinetuneDev => Provenance::Dev,
        }
    }

    /// Pretraining uses all three formats; fine-tuning is source-only.
    pub fn default_formats(&self) -> FormatPlan {
        match self {
            StageKind::Pretrain => FormatPlan::Multi,
            _ => FormatPlan::Single(InputFormat::Src),
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which formats a stage trains with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatPlan {
    /// Three-way example split, one format each.
    Multi,
    Single(InputFormat),
}

impl FormatPlan {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "multi" {
            Ok(FormatPlan::Multi)
        } else {
            Ok(FormatPlan::Single(InputFormat::parse(s)?))
        }
    }
}

impl fmt::Display for FormatPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatPlan::Multi => f.write_str("multi"),
            FormatPlan::Single(fmt_) => write!(f, "{fmt_}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageSpec {
    pub kind: StageKind,
    pub formats: FormatPlan,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_encoder: f64,
    pub lr_head: f64,
    pub seed: u64,
}

impl StageSpec {
    pub fn new(kind: StageKind, epochs: usize, batch_size: usize, seed: u64) -> Self {
        StageSpec {
            kind,
            formats: kind.default_formats(),
            epochs,
            batch_size,
            lr_encoder: 0.0, // filled from the model config by with_model_rates
            lr_head: 0.0,
            seed,
        }
    }

    pub fn with_model_rates(mut self, state: &ModelState) -> Self {
        if self.lr_encoder <= 0.0 {
            self.lr_encoder = state.config.lr_encoder;
        }
        if self.lr_head <= 0.0 {
            self.lr_head = state.config.lr_head;
        }
        self
    }
}

/// Trains per the spec without saving; used by both [`run_stage`] and the
/// cross-validation fine-tunes.
pub(crate) fn train_stage(
    mut state: ModelState,
    spec: &StageSpec,
    dataset: &Dataset,
) -> Result<ModelState> {
    if dataset.provenance != spec.kind.expected_provenance() {
        return Err(Error::Data(format!(
            "stage {} expects {} data, got {}",
            spec.kind,
            spec.kind.expected_provenance(),
            dataset.provenance
        )));
    }
    dataset.require_scores()?;
    if !(spec.lr_encoder > 0.0 && spec.lr_head > 0.0) {
        return Err(Error::Config("stage learning rates must be positive".into()));
    }
    state.config.lr_encoder = spec.lr_encoder;
    state.config.lr_head = spec.lr_head;

    if spec.epochs > 0 && !dataset.is_empty() {
        let assignment = match spec.formats {
            FormatPlan::Multi => FormatAssignment::three_way(
                dataset,
                seeding::mix(spec.seed, seeding::hash_label("format-split")),
            )?,
            FormatPlan::Single(format) => FormatAssignment::Single(format),
        };
        for epoch in 0..spec.epochs {
            train_epoch(
                &mut state,
                dataset,
                &assignment,
                &TrainOptions {
                    batch_size: spec.batch_size,
                    shuffle_seed: seeding::mix(spec.seed, epoch as u64),
                },
            )?;
        }
    }
    Ok(state)
}

/// Runs one training stage and saves a checkpoint stamped with the stage
/// name, data hash, and seed. A zero-epoch stage saves the input state
/// unchanged.
pub fn run_stage(
    state: ModelState,
    spec: &StageSpec,
    dataset: &Dataset,
    checkpoint_path: &Path,
) -> Result<(ModelState, PathBuf)> {
    let mut state = train_stage(state, spec, dataset)?;
    state.meta.stage = Some(spec.kind.name().to_string());
    state.meta.data_hash = Some(dataset.content_hash());
    state.meta.seed = spec.seed;
    state
        .meta
        .extra
        .insert("epochs".into(), spec.epochs.to_string());
    state
        .meta
        .extra
        .insert("batch_size".into(), spec.batch_size.to_string());
    state
        .meta
        .extra
        .insert("formats".into(), spec.formats.to_string());
    save_checkpoint(&state, checkpoint_path)?;
    Ok((state, checkpoint_path.to_path_buf()))
}
