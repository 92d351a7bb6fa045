//! Sequence encoders.
//!
//! An encoder turns a token-id sequence into per-position representations;
//! the row at the CLS position is the pooled sequence representation fed to
//! the regression head. Training code only touches this trait, so richer
//! encoders can be added without changing it.
//!
//! The reference `mean-context` encoder defines row `t` as
//! `tanh(W · (e_t + ē) + b)` where `ē` is the mean input embedding of the
//! sequence, so the CLS row summarizes the whole input.

use crate::corpus::Sequence;
use crate::error::{Error, Result};
use crate::model::params::ModelParams;

/// Forward-pass caches needed to backpropagate through the pooled
/// representation.
pub struct EncoderActivations {
    /// The pooled (CLS-position) representation h.
    pub pooled: Vec<f64>,
    /// Pre-activation at the CLS position.
    pub preactivation: Vec<f64>,
    /// Encoder input feature at the CLS position: e_cls + ē.
    pub feature: Vec<f64>,
}

pub trait Encoder: Send + Sync {
    fn kind(&self) -> &'static str;

    /// Pooled representation plus backprop caches.
    fn forward(&self, params: &ModelParams, seq: &Sequence) -> EncoderActivations;

    /// Full per-position representation matrix (sequence length × d).
    fn encode_rows(&self, params: &ModelParams, seq: &Sequence) -> Vec<Vec<f64>>;

    /// Accumulates dLoss/dparams into `grads`, given dLoss/dpooled.
    fn backward(
        &self,
        params: &ModelParams,
        seq: &Sequence,
        activations: &EncoderActivations,
        d_pooled: &[f64],
        grads: &mut ModelParams,
    );
}

/// Looks up an encoder implementation by its config identifier.
pub fn encoder_for(kind: &str) -> Result<&'static dyn Encoder> {
    match kind {
        "mean-context" => Ok(&MeanContextEncoder),
        other => Err(Error::Config(format!(
            "unknown encoder kind '{other}' (available: mean-context)"
        ))),
    }
}

pub struct MeanContextEncoder;

impl MeanContextEncoder {
    fn mean_embedding(params: &ModelParams, seq: &Sequence) -> Vec<f64> {
        let d = params.embedding.cols();
        let mut mean = vec![0.0; d];
        for &id in &seq.ids {
            for (m, e) in mean.iter_mut().zip(params.embedding.row(id as usize)) {
                *m += e;
            }
        }
        let inv = 1.0 / seq.ids.len() as f64;
        for m in &mut mean {
            *m *= inv;
        }
        mean
    }

    fn row_for(params: &ModelParams, mean: &[f64], id: u32) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let feature: Vec<f64> = params
            .embedding
            .row(id as usize)
            .iter()
            .zip(mean)
            .map(|(e, m)| e + m)
            .collect();
        let mut preactivation = params.enc_weight.matvec(&feature);
        for (z, b) in preactivation.iter_mut().zip(&params.enc_bias) {
            *z += b;
        }
        let pooled = preactivation.iter().map(|z| z.tanh()).collect();
        (feature, preactivation, pooled)
    }
}

impl Encoder for MeanContextEncoder {
    fn kind(&self) -> &'static str {
        "mean-context"
    }

    fn forward(&self, params: &ModelParams, seq: &Sequence) -> EncoderActivations {
        let mean = Self::mean_embedding(params, seq);
        let cls_id = seq.ids[seq.cls_position()];
        let (feature, preactivation, pooled) = Self::row_for(params, &mean, cls_id);
        EncoderActivations {
            pooled,
            preactivation,
            feature,
        }
    }

    fn encode_rows(&self, params: &ModelParams, seq: &Sequence) -> Vec<Vec<f64>> {
        let mean = Self::mean_embedding(params, seq);
        seq.ids
            .iter()
            .map(|&id| Self::row_for(params, &mean, id).2)
            .collect()
    }

    fn backward(
        &self,
        params: &ModelParams,
        seq: &Sequence,
        activations: &EncoderActivations,
        d_pooled: &[f64],
        grads: &mut ModelParams,
    ) {
        // h = tanh(z): dz = dh * (1 - h^2).
        let d_pre: Vec<f64> = d_pooled
            .iter()
            .zip(&activations.pooled)
            .map(|(dh, h)| dh * (1.0 - h * h))
            .collect();

        grads.enc_weight.add_outer(&d_pre, &activations.feature);
        for (g, dz) in grads.enc_bias.iter_mut().zip(&d_pre) {
            *g += dz;
        }

        // feature = e_cls + mean(e_t over positions t).
        let d_feature = params.enc_weight.transpose_matvec(&d_pre);
        let cls_id = seq.ids[seq.cls_position()] as usize;
        for (g, df) in grads.embedding.row_mut(cls_id).iter_mut().zip(&d_feature) {
            *g += df;
        }
        let inv = 1.0 / seq.ids.len() as f64;
        for &id in &seq.ids {
            for (g, df) in grads
                .embedding
                .row_mut(id as usize)
                .iter_mut()
                .zip(&d_feature)
            {
                *g += df * inv;
            }
        }
    }
}
