//! 5-fold cross-validation for hyperparameter selection, and the final
//! full-dev fine-tune with the winning point.

use crate::corpus::{Dataset, InputFormat};
use crate::error::{Error, Result};
use crate::eval::spearman;
use crate::model::ModelState;
use crate::pipeline::{train_stage, FormatPlan, StageKind, StageSpec};
use crate::seeding;

use rand::seq::SliceRandom;

pub const FOLD_COUNT: usize = 5;

/// One point of the fine-tuning grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperPoint {
    pub epochs: usize,
    pub lr_head: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CvOptions {
    pub batch_size: usize,
    /// Drives the fold assignment and every fold's training seed.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct CvResult {
    pub point: HyperPoint,
    pub fold_spearman: Vec<f64>,
    pub mean_spearman: f64,
    pub fold_seed: u64,
}

/// Seeded shuffle dealt into [`FOLD_COUNT`] folds of near-equal size
/// (earlier folds take the remainder). Returns index lists into the dataset.
pub fn kfold_folds(n: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeding::rng(seed));
    let base = n / FOLD_COUNT;
    let remainder = n % FOLD_COUNT;
    let mut folds = Vec::with_capacity(FOLD_COUNT);
    let mut start = 0;
    for i in 0..FOLD_COUNT {
        let size = base + usize::from(i < remainder);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    folds
}

fn subset(dev: &Dataset, indices: &[usize]) -> Result<Dataset> {
    Dataset::new(
        indices.iter().map(|&i| dev.examples[i].clone()).collect(),
        dev.provenance,
    )
}

fn finetune_spec(point: &HyperPoint, base: &ModelState, batch_size: usize, seed: u64) -> StageSpec {
    StageSpec {
        kind: StageKind::FinetuneDev,
        formats: FormatPlan::Single(InputFormat::Src),
        epochs: point.epochs,
        batch_size,
        lr_encoder: base.config.lr_encoder,
        lr_head: point.lr_head,
        seed,
    }
}

/// For each grid point: fine-tune the base model on four folds, score
/// source-only Spearman on the held-out fold, and average over the five
/// folds. The fold assignment is fixed once per call, so every grid point
/// sees the same folds. Results come back sorted by mean, descending.
pub fn kfold_cv(
    dev: &Dataset,
    grid: &[HyperPoint],
    base: &ModelState,
    opts: &CvOptions,
) -> Result<Vec<CvResult>> {
    if grid.is_empty() {
        return Err(Error::Data("cross-validation needs a nonempty grid".into()));
    }
    if dev.len() < FOLD_COUNT {
        return Err(Error::Data(format!(
            "cross-validation needs at least {FOLD_COUNT} dev examples, got {}",
            dev.len()
        )));
    }
    dev.require_scores()?;

    let fold_seed = opts.seed;
    let folds = kfold_folds(dev.len(), fold_seed);
    let mut results = Vec::with_capacity(grid.len());
    for (point_idx, point) in grid.iter().enumerate() {
        let mut fold_spearman = Vec::with_capacity(FOLD_COUNT);
        for (fold_idx, held_out) in folds.iter().enumerate() {
            let train_indices: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != fold_idx)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            let train_set = subset(dev, &train_indices)?;
            let held_set = subset(dev, held_out)?;

            let run_seed = seeding::mix(
                seeding::mix(opts.seed, point_idx as u64 + 1),
                fold_idx as u64,
            );
            let spec = finetune_spec(point, base, opts.batch_size, run_seed);
            let tuned = train_stage(base.clone(), &spec, &train_set)?;
            let preds = tuned.predict(&held_set, InputFormat::Src)?;
            fold_spearman.push(spearman(&preds, &held_set.scores()?)?);
        }
        let mean_spearman = fold_spearman.iter().sum::<f64>() / FOLD_COUNT as f64;
        results.push(CvResult {
            point: *point,
            fold_spearman,
            mean_spearman,
            fold_seed,
        });
    }
    results.sort_by(|a, b| {
        b.mean_spearman
            .partial_cmp(&a.mean_spearman)
            .expect("correlations are finite")
    });
    Ok(results)
}

/// Fine-tunes the base model on the entire dev set with the winning
/// hyperparameters (source-only). The result's metadata cites the point.
pub fn final_finetune(
    base: &ModelState,
    dev: &Dataset,
    best: &HyperPoint,
    opts: &CvOptions,
) -> Result<ModelState> {
    let spec = finetune_spec(best, base, opts.batch_size, opts.seed);
    let mut tuned = train_stage(base.clone(), &spec, dev)?;
    tuned.meta.stage = Some(StageKind::FinetuneDev.name().to_string());
    tuned.meta.data_hash = Some(dev.content_hash());
    tuned.meta.seed = opts.seed;
    tuned
        .meta
        .extra
        .insert("cv_epochs".into(), best.epochs.to_string());
    tuned
        .meta
        .extra
        .insert("cv_lr_head".into(), best.lr_head.to_string());
    Ok(tuned)
}
