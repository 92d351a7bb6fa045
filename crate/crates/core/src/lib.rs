//! Desk-scale toolkit for training and evaluating translation quality
//! estimation models.
//!
//! The crate is organized around the lifecycle of a quality-estimation
//! system:
//!
//! - [`corpus`] — data model, TSV/JSONL I/O, tokenization, and construction
//!   of the three unified input formats (source-only, reference-only,
//!   source+reference).
//! - [`datagen`] — synthetic data construction: pseudo-translation,
//!   word/span dropping, multi-scorer labeling, ranking-based score
//!   normalization, and quality-bin pruning.
//! - [`model`] — the trainable scorer: pluggable encoder, CLS pooling,
//!   feedforward head, analytic gradients, Adam, and checkpoint
//!   persistence.
//! - [`pipeline`] — staged training (pretrain → DA → MQM → dev),
//!   checkpoint selection, 5-fold cross-validation, and ensembling.
//! - [`eval`] — Spearman/Pearson/Kendall correlation reports and score
//!   distribution summaries.
//!
//! Everything that consumes randomness takes an explicit seed and is
//! reproducible bit-for-bit across runs.

pub mod corpus;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod model;
pub mod pipeline;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
