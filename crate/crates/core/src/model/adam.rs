//! Adam optimizer with two learning-rate groups.
//!
//! Encoder-side parameters (embedding table and encoder affine) update with
//! `lr_encoder`; head layers with `lr_head`. Moments live alongside the
//! parameters and are checkpointed, so resuming from a saved state is
//! bitwise identical to an uninterrupted run.

use crate::model::params::ModelParams;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
}

impl AdamState {
    pub fn new(like: &ModelParams) -> Self {
        AdamState {
            m: like.zeros_like(),
            v: like.zeros_like(),
            step: 0,
        }
    }

    /// One Adam update over every parameter.
    pub fn apply(
        &mut self,
        params: &mut ModelParams,
        grads: &ModelParams,
        lr_encoder: f64,
        lr_head: f64,
    ) {
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - ADAM_BETA1.powi(t);
        let bias2 = 1.0 - ADAM_BETA2.powi(t);

        let mut p_sections = params.sections_mut();
        let mut m_sections = self.m.sections_mut();
        let mut v_sections = self.v.sections_mut();
        let g_sections = grads.sections();

        for (((p_sec, m_sec), v_sec), g_sec) in p_sections
            .iter_mut()
            .zip(m_sections.iter_mut())
            .zip(v_sections.iter_mut())
            .zip(g_sections.iter())
        {
            let lr = if p_sec.0.starts_with("head.") {
                lr_head
            } else {
                lr_encoder
            };
            for (((p, m), v), g) in p_sec
                .1
                .iter_mut()
                .zip(m_sec.1.iter_mut())
                .zip(v_sec.1.iter_mut())
                .zip(g_sec.1.iter())
            {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            }
        }
    }
}
