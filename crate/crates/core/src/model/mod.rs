//! The trainable scorer.
//!
//! A model is an embedding table, a pluggable encoder producing per-position
//! representations, CLS pooling, and a feedforward regression head with
//! hyperbolic-tangent activations between layers. Training minimizes squared
//! error against quality labels, summed over the input formats in play, with
//! analytic gradients and Adam.

mod adam;
mod checkpoint;
mod encoder;
mod params;
mod train;

pub use adam::{AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use encoder::{encoder_for, Encoder, EncoderActivations, MeanContextEncoder};
pub use params::{Dense, Mat, ModelParams};
pub use train::{
    encode_batch, multi_format_gradients, multi_format_loss, squared_error, train_epoch,
    train_step, EpochStats, FormatAssignment, StepLoss, TrainOptions,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{build_input, Dataset, InputFormat, Sequence, Vocabulary, NUM_SPECIAL_IDS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Embedding and encoder width.
    pub d: usize,
    /// Content buckets in the hash vocabulary.
    pub vocab_buckets: u32,
    /// Output width of each head layer; the last must be 1.
    pub head_dims: Vec<usize>,
    pub lr_encoder: f64,
    pub lr_head: f64,
    /// Seed for parameter initialization.
    pub seed: u64,
    pub encoder_kind: String,
}

impl ModelConfig {
    /// Small configuration that trains in seconds on one CPU core.
    pub fn desk() -> Self {
        ModelConfig {
            d: 64,
            vocab_buckets: 4096,
            head_dims: vec![128, 64, 1],
            lr_encoder: 3e-3,
            lr_head: 1e-2,
            seed: 1,
            encoder_kind: "mean-context".into(),
        }
    }

    /// The documented full-scale preset: hidden width and head sizes of a
    /// large pretrained encoder with its published fine-tuning rates. Far
    /// too large to train here; kept as a reference configuration.
    pub fn full_scale() -> Self {
        ModelConfig {
            d: 1024,
            vocab_buckets: 250_000,
            head_dims: vec![3072, 1024, 1],
            lr_encoder: 1e-5,
            lr_head: 3e-5,
            seed: 1,
            encoder_kind: "mean-context".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::Config("model width d must be at least 1".into()));
        }
        if self.vocab_buckets < 1 {
            return Err(Error::Config("vocab_buckets must be at least 1".into()));
        }
        if self.head_dims.last() != Some(&1) {
            return Err(Error::Config(
                "the last head layer must have output width 1".into(),
            ));
        }
        if self.head_dims.iter().any(|&w| w == 0) {
            return Err(Error::Config("head layer widths must be positive".into()));
        }
        if !(self.lr_encoder > 0.0) || !(self.lr_head > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        encoder_for(&self.encoder_kind)?;
        Ok(())
    }

    /// Total embedding rows: special ids plus content buckets.
    pub fn id_count(&self) -> usize {
        NUM_SPECIAL_IDS as usize + self.vocab_buckets as usize
    }
}

/// Training provenance carried through checkpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub stage: Option<String>,
    pub data_hash: Option<String>,
    pub seed: u64,
    /// Free-form annotations, e.g. the hyperparameters a fine-tune used.
    pub extra: BTreeMap<String, String>,
}

/// A model with its optimizer state and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub params: ModelParams,
    pub adam: AdamState,
    pub meta: TrainingMeta,
}

impl ModelState {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let params = ModelParams::init(&config);
        let adam = AdamState::new(&params);
        Ok(ModelState {
            config,
            params,
            adam,
            meta: TrainingMeta::default(),
        })
    }

    /// The vocabulary this model's inputs must be encoded with.
    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.config.vocab_buckets)
    }

    pub fn encoder(&self) -> &'static dyn Encoder {
        encoder_for(&self.config.encoder_kind).expect("config validated at construction")
    }

    fn check_ids(&self, seq: &Sequence) -> Result<()> {
        let limit = self.config.id_count() as u32;
        if let Some(&bad) = seq.ids.iter().find(|&&id| id >= limit) {
            return Err(Error::Data(format!(
                "token id {bad} is outside the vocabulary range 0..{limit}"
            )));
        }
        Ok(())
    }

    /// Predicted quality of one encoded sequence.
    pub fn forward(&self, seq: &Sequence) -> Result<f64> {
        self.check_ids(seq)?;
        let activations = self.encoder().forward(&self.params, seq);
        Ok(train::head_forward(&self.params, &activations.pooled).prediction)
    }

    /// One prediction per example, order-aligned with the dataset.
    pub fn predict(&self, dataset: &Dataset, format: InputFormat) -> Result<Vec<f64>> {
        let vocab = self.vocabulary();
        dataset
            .examples
            .iter()
            .map(|ex| {
                let seq = build_input(ex, format, &vocab)?;
                self.forward(&seq)
                    .map_err(|e| Error::Data(format!("example '{}': {e}", ex.id)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, LanguagePair, Provenance};

    pub(crate) fn tiny_config() -> ModelConfig {
        ModelConfig {
            d: 8,
            vocab_buckets: 64,
            head_dims: vec![6, 1],
            seed: 5,
            ..ModelConfig::desk()
        }
    }

    pub(crate) fn example(id: &str, hyp: &str, src: &str, reference: Option<&str>) -> Example {
        Example {
            id: id.into(),
            lp: LanguagePair::parse("de-en").unwrap(),
            src: src.into(),
            hyp: hyp.into(),
            reference: reference.map(str::to_string),
            score: None,
        }
    }

    #[test]
    fn config_validation_catches_bad_heads_and_rates() {
        let mut config = ModelConfig::desk();
        assert!(config.validate().is_ok());
        config.head_dims = vec![8, 2];
        assert!(config.validate().is_err());
        let mut config = ModelConfig::desk();
        config.lr_head = 0.0;
        assert!(config.validate().is_err());
        let mut config = ModelConfig::desk();
        config.encoder_kind = "bogus".into();
        assert!(config.validate().is_err());
    }

    #[test]
    fn zero_parameters_predict_zero() {
        let mut state = ModelState::new(tiny_config()).unwrap();
        state.params = state.params.zeros_like();
        let vocab = state.vocabulary();
        let ex = example("e", "guten tag", "good day", None);
        let seq = build_input(&ex, InputFormat::Src, &vocab).unwrap();
        assert_eq!(state.forward(&seq).unwrap(), 0.0);
    }

    #[test]
    fn forward_is_deterministic() {
        let state = ModelState::new(tiny_config()).unwrap();
        let vocab = state.vocabulary();
        let ex = example("e", "guten tag", "good day", None);
        let seq = build_input(&ex, InputFormat::Src, &vocab).unwrap();
        assert_eq!(state.forward(&seq).unwrap(), state.forward(&seq).unwrap());
    }

    #[test]
    fn permuting_content_tokens_leaves_prediction_unchanged() {
        let state = ModelState::new(tiny_config()).unwrap();
        let vocab = state.vocabulary();
        let a = build_input(
            &example("e", "ein zwei drei", "one two", None),
            InputFormat::Src,
            &vocab,
        )
        .unwrap();
        let b = build_input(
            &example("e", "zwei drei ein", "two one", None),
            InputFormat::Src,
            &vocab,
        )
        .unwrap();
        // Equal up to summation rounding in the embedding mean.
        let (pa, pb) = (state.forward(&a).unwrap(), state.forward(&b).unwrap());
        assert!((pa - pb).abs() < 1e-12, "{pa} vs {pb}");
    }

    #[test]
    fn out_of_range_id_is_an_error() {
        let state = ModelState::new(tiny_config()).unwrap();
        let vocab = Vocabulary::new(100_000); // larger than the model's table
        let mut seq = build_input(
            &example("e", "guten tag", "good day", None),
            InputFormat::Src,
            &vocab,
        )
        .unwrap();
        seq.ids[1] = 99_999;
        assert!(state.forward(&seq).is_err());
    }

    #[test]
    fn predict_aligns_with_forward() {
        let state = ModelState::new(tiny_config()).unwrap();
        let vocab = state.vocabulary();
        let ex = example("e", "guten tag", "good day", None);
        let ds = Dataset::new(vec![ex.clone()], Provenance::Dev).unwrap();
        let preds = state.predict(&ds, InputFormat::Src).unwrap();
        let seq = build_input(&ex, InputFormat::Src, &vocab).unwrap();
        assert_eq!(preds, vec![state.forward(&seq).unwrap()]);
    }
}
