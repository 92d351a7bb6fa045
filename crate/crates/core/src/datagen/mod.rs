//! Synthetic training data construction.
//!
//! The pipeline: translate parallel source sentences with a
//! [`TranslationProvider`], degrade the hypotheses by word and span
//! dropping, pseudo-label with one or more [`Scorer`]s, aggregate scores by
//! ranking-based normalization, and reshape the quality distribution by
//! quality-bin pruning.

mod degrade;
mod normalize;
mod provider;
mod prune;
mod scoring;
mod synth;

pub use degrade::{span_drop, word_drop, DegradeConfig};
pub use normalize::{aggregate, rank_z_normalize, renormalize};
pub use provider::{HttpProvider, HttpProviderConfig, OfflineProvider, TranslationProvider};
pub use prune::{bin_prune, PAPER_DROP_RATIOS};
pub use scoring::{label, CheckpointScorer, OverlapScorer, ScoreMatrix, Scorer};
pub use synth::synthesize;
