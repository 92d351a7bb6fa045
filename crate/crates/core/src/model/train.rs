//! Training: multi-format loss, analytic gradients, and epoch iteration.
//!
//! One multi-format step consumes one batch per input format (equal sizes,
//! so no format dominates) and minimizes the sum of the three per-format
//! mean squared errors with a single optimizer update. Single-format
//! training — used when fine-tuning source-only — keeps only the matching
//! term of that sum.

use std::collections::HashMap;

use rand::seq::SliceRandom;

use crate::corpus::{build_input, split_three_way, Dataset, Example, InputFormat, Sequence, Vocabulary};
use crate::error::{Error, Result};
use crate::model::params::ModelParams;
use crate::model::ModelState;
use crate::seeding;

/// Squared-error loss for one prediction.
pub fn squared_error(prediction: f64, target: f64) -> f64 {
    let diff = prediction - target;
    diff * diff
}

/// Per-format sub-losses of one step. `total` is exactly the sum of the
/// sub-losses in play (absent formats contribute zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLoss {
    pub total: f64,
    pub ref_loss: f64,
    pub src_loss: f64,
    pub src_ref_loss: f64,
}

pub(crate) struct HeadForward {
    pub prediction: f64,
    /// `activations[0]` is the pooled input; `activations[i+1]` is the
    /// output of head layer `i` (post-tanh except for the final layer).
    pub activations: Vec<Vec<f64>>,
}

pub(crate) fn head_forward(params: &ModelParams, pooled: &[f64]) -> HeadForward {
    let last = params.head.len() - 1;
    let mut activations = Vec::with_capacity(params.head.len() + 1);
    activations.push(pooled.to_vec());
    for (i, layer) in params.head.iter().enumerate() {
        let mut z = layer.weight.matvec(activations.last().expect("nonempty"));
        for (zi, b) in z.iter_mut().zip(&layer.bias) {
            *zi += b;
        }
        if i < last {
            for zi in &mut z {
                *zi = zi.tanh();
            }
        }
        activations.push(z);
    }
    let prediction = activations.last().expect("nonempty")[0];
    HeadForward {
        prediction,
        activations,
    }
}

/// Backpropagates through the head, accumulating into `grads` and returning
/// dLoss/dpooled.
fn head_backward(
    params: &ModelParams,
    forward: &HeadForward,
    d_prediction: f64,
    grads: &mut ModelParams,
) -> Vec<f64> {
    let mut delta = vec![d_prediction];
    for i in (0..params.head.len()).rev() {
        let input = &forward.activations[i];
        grads.head[i].weight.add_outer(&delta, input);
        for (g, dz) in grads.head[i].bias.iter_mut().zip(&delta) {
            *g += dz;
        }
        let d_input = params.head[i].weight.transpose_matvec(&delta);
        if i == 0 {
            return d_input;
        }
        // input is tanh(z) of the previous layer.
        delta = d_input
            .iter()
            .zip(input)
            .map(|(d, a)| d * (1.0 - a * a))
            .collect();
    }
    unreachable!("head has at least one layer")
}

/// Mean squared error of one batch; accumulates gradients when asked.
fn batch_eval(
    state: &ModelState,
    batch: &[(Sequence, f64)],
    expected_format: InputFormat,
    mut grads: Option<&mut ModelParams>,
) -> Result<f64> {
    let scale = 1.0 / batch.len() as f64;
    let encoder = state.encoder();
    let mut loss = 0.0;
    for (seq, target) in batch {
        if seq.format != expected_format {
            return Err(Error::Data(format!(
                "batch for format {expected_format} contains a {} sequence",
                seq.format
            )));
        }
        if !target.is_finite() {
            return Err(Error::Data("training target is not finite".into()));
        }
        state.check_ids(seq)?;
        let enc = encoder.forward(&state.params, seq);
        let fwd = head_forward(&state.params, &enc.pooled);
        loss += squared_error(fwd.prediction, *target) * scale;
        if let Some(g) = grads.as_deref_mut() {
            let d_prediction = 2.0 * (fwd.prediction - target) * scale;
            let d_pooled = head_backward(&state.params, &fwd, d_prediction, g);
            encoder.backward(&state.params, seq, &enc, &d_pooled, g);
        }
    }
    Ok(loss)
}

fn check_multi_format_batches(
    batch_ref: &[(Sequence, f64)],
    batch_src: &[(Sequence, f64)],
    batch_src_ref: &[(Sequence, f64)],
) -> Result<()> {
    if batch_ref.len() != batch_src.len() || batch_src.len() != batch_src_ref.len() {
        return Err(Error::Data(format!(
            "format batches must have equal size, got {}/{}/{}",
            batch_ref.len(),
            batch_src.len(),
            batch_src_ref.len()
        )));
    }
    if batch_ref.is_empty() {
        return Err(Error::Data("empty training batches".into()));
    }
    Ok(())
}

/// The summed three-format loss without touching any state.
pub fn multi_format_loss(
    state: &ModelState,
    batch_ref: &[(Sequence, f64)],
    batch_src: &[(Sequence, f64)],
    batch_src_ref: &[(Sequence, f64)],
) -> Result<StepLoss> {
    check_multi_format_batches(batch_ref, batch_src, batch_src_ref)?;
    let ref_loss = batch_eval(state, batch_ref, InputFormat::Ref, None)?;
    let src_loss = batch_eval(state, batch_src, InputFormat::Src, None)?;
    let src_ref_loss = batch_eval(state, batch_src_ref, InputFormat::SrcRef, None)?;
    Ok(StepLoss {
        total: ref_loss + src_loss + src_ref_loss,
        ref_loss,
        src_loss,
        src_ref_loss,
    })
}

/// The summed three-format loss and its analytic gradient.
pub fn multi_format_gradients(
    state: &ModelState,
    batch_ref: &[(Sequence, f64)],
    batch_src: &[(Sequence, f64)],
    batch_src_ref: &[(Sequence, f64)],
) -> Result<(StepLoss, ModelParams)> {
    check_multi_format_batches(batch_ref, batch_src, batch_src_ref)?;
    let mut grads = state.params.zeros_like();
    let ref_loss = batch_eval(state, batch_ref, InputFormat::Ref, Some(&mut grads))?;
    let src_loss = batch_eval(state, batch_src, InputFormat::Src, Some(&mut grads))?;
    let src_ref_loss = batch_eval(state, batch_src_ref, InputFormat::SrcRef, Some(&mut grads))?;
    let loss = StepLoss {
        total: ref_loss + src_loss + src_ref_loss,
        ref_loss,
        src_loss,
        src_ref_loss,
    };
    Ok((loss, grads))
}

fn apply_update(state: &mut ModelState, total_loss: f64, grads: &ModelParams) -> Result<()> {
    if !total_loss.is_finite() || !grads.all_finite() {
        return Err(Error::Numeric(
            "non-finite loss or gradient; training aborted, state not updated".into(),
        ));
    }
    let (lr_encoder, lr_head) = (state.config.lr_encoder, state.config.lr_head);
    state.adam.apply(&mut state.params, grads, lr_encoder, lr_head);
    Ok(())
}

/// One optimizer step over one batch per input format. The state is only
/// updated when the loss and every gradient are finite.
pub fn train_step(
    state: &mut ModelState,
    batch_ref: &[(Sequence, f64)],
    batch_src: &[(Sequence, f64)],
    batch_src_ref: &[(Sequence, f64)],
) -> Result<StepLoss> {
    let (loss, grads) = multi_format_gradients(state, batch_ref, batch_src, batch_src_ref)?;
    apply_update(state, loss.total, &grads)?;
    Ok(loss)
}

fn single_format_step(
    state: &mut ModelState,
    batch: &[(Sequence, f64)],
    format: InputFormat,
) -> Result<StepLoss> {
    if batch.is_empty() {
        return Err(Error::Data("empty training batch".into()));
    }
    let mut grads = state.params.zeros_like();
    let loss = batch_eval(state, batch, format, Some(&mut grads))?;
    apply_update(state, loss, &grads)?;
    let mut step = StepLoss {
        total: loss,
        ref_loss: 0.0,
        src_loss: 0.0,
        src_ref_loss: 0.0,
    };
    match format {
        InputFormat::Ref => step.ref_loss = loss,
        InputFormat::Src => step.src_loss = loss,
        InputFormat::SrcRef => step.src_ref_loss = loss,
    }
    Ok(step)
}

/// Which input format each example trains under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatAssignment {
    /// Every example uses one format (fine-tuning is source-only).
    Single(InputFormat),
    /// Per-example formats, index-aligned with the dataset.
    PerExample(Vec<InputFormat>),
}

impl FormatAssignment {
    /// Deals the dataset into three near-equal parts, one per format, via a
    /// seeded shuffle. Each example serves exactly one format.
    pub fn three_way(dataset: &Dataset, seed: u64) -> Result<Self> {
        let (part_ref, part_src, part_src_ref) = split_three_way(dataset, seed)?;
        let mut by_id: HashMap<&str, InputFormat> = HashMap::with_capacity(dataset.len());
        for ex in &part_ref.examples {
            by_id.insert(ex.id.as_str(), InputFormat::Ref);
        }
        for ex in &part_src.examples {
            by_id.insert(ex.id.as_str(), InputFormat::Src);
        }
        for ex in &part_src_ref.examples {
            by_id.insert(ex.id.as_str(), InputFormat::SrcRef);
        }
        Ok(FormatAssignment::PerExample(
            dataset
                .examples
                .iter()
                .map(|ex| by_id[ex.id.as_str()])
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub batch_size: usize,
    /// Seed for this epoch's batch order (callers vary it per epoch).
    pub shuffle_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub steps: usize,
    /// Mean of the per-step total losses; 0 when no step ran.
    pub mean_loss: f64,
}

/// Encodes scored examples into (sequence, target) training items.
pub fn encode_batch(
    examples: &[Example],
    format: InputFormat,
    vocab: &Vocabulary,
) -> Result<Vec<(Sequence, f64)>> {
    examples
        .iter()
        .map(|ex| {
            let target = ex
                .score
                .ok_or_else(|| Error::Data(format!("example '{}' has no score", ex.id)))?;
            Ok((build_input(ex, format, vocab)?, target))
        })
        .collect()
}

/// One pass over the dataset in seeded-shuffled batches.
///
/// With a per-example (multi-format) assignment, each step pairs one
/// equal-size batch per format; trailing examples that cannot form a full
/// triple are skipped for this epoch (a different shuffle picks different
/// ones next epoch). With a single-format assignment there is one batch per
/// step and the final batch may be short.
pub fn train_epoch(
    state: &mut ModelState,
    dataset: &Dataset,
    assignment: &FormatAssignment,
    opts: &TrainOptions,
) -> Result<EpochStats> {
    if opts.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if dataset.is_empty() {
        return Ok(EpochStats {
            steps: 0,
            mean_loss: 0.0,
        });
    }
    dataset.require_scores()?;
    let vocab = state.vocabulary();
    let mut rng = seeding::rng(opts.shuffle_seed);
    let mut steps = 0usize;
    let mut loss_sum = 0.0;

    match assignment {
        FormatAssignment::Single(format) => {
            let mut items = encode_batch(&dataset.examples, *format, &vocab)?;
            items.shuffle(&mut rng);
            for batch in items.chunks(opts.batch_size) {
                loss_sum += single_format_step(state, batch, *format)?.total;
                steps += 1;
            }
        }
        FormatAssignment::PerExample(formats) => {
            if formats.len() != dataset.len() {
                return Err(Error::Data(format!(
                    "format assignment covers {} examples, dataset has {}",
                    formats.len(),
                    dataset.len()
                )));
            }
            let mut buckets: [Vec<&Example>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for (ex, format) in dataset.examples.iter().zip(formats) {
                let slot = match format {
                    InputFormat::Ref => 0,
                    InputFormat::Src => 1,
                    InputFormat::SrcRef => 2,
                };
                buckets[slot].push(ex);
            }
            let mut encoded: Vec<Vec<(Sequence, f64)>> = Vec::with_capacity(3);
            for (bucket, format) in buckets.iter().zip(InputFormat::ALL) {
                let refs: Vec<Example> = bucket.iter().map(|&e| e.clone()).collect();
                let mut items = encode_batch(&refs, format, &vocab)?;
                items.shuffle(&mut rng);
                encoded.push(items);
            }
            let chunk_counts: Vec<usize> = encoded
                .iter()
                .map(|items| items.len() / opts.batch_size + usize::from(items.len() % opts.batch_size != 0))
                .collect();
            let step_count = chunk_counts.iter().copied().min().unwrap_or(0);
            for i in 0..step_count {
                let chunks: Vec<&[(Sequence, f64)]> = encoded
                    .iter()
                    .map(|items| {
                        let start = i * opts.batch_size;
                        let end = (start + opts.batch_size).min(items.len());
                        &items[start..end]
                    })
                    .collect();
                let size = chunks.iter().map(|c| c.len()).min().expect("three chunks");
                let loss = train_step(
                    state,
                    &chunks[0][..size],
                    &chunks[1][..size],
                    &chunks[2][..size],
                )?;
                loss_sum += loss.total;
                steps += 1;
            }
        }
    }

    Ok(EpochStats {
        steps,
        mean_loss: if steps == 0 { 0.0 } else { loss_sum / steps as f64 },
    })
}
