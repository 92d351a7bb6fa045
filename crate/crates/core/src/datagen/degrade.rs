//! Hypothesis quality degradation by word and span dropping.
//!
//! Pseudo-translations are usually too good to teach a scorer anything, so
//! quality is attenuated by removing tokens. Word dropping removes tokens
//! independently; span dropping removes one contiguous run. Both respect a
//! floor on surviving tokens.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DegradeConfig {
    /// Per-token independent drop probability.
    pub word_drop_prob: f64,
    /// Probability that a span drop is applied at all.
    pub span_drop_prob: f64,
    /// Upper bound on span length as a fraction of the current token count.
    pub max_span_fraction: f64,
    /// Never leave fewer than this many tokens.
    pub min_tokens_kept: usize,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        DegradeConfig {
            word_drop_prob: 0.15,
            span_drop_prob: 0.3,
            max_span_fraction: 0.3,
            min_tokens_kept: 1,
        }
    }
}

impl DegradeConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.word_drop_prob) || !unit(self.span_drop_prob) {
            return Err(Error::Config(
                "drop probabilities must lie in [0, 1]".into(),
            ));
        }
        if !(self.max_span_fraction > 0.0 && self.max_span_fraction <= 1.0) {
            return Err(Error::Config("max_span_fraction must lie in (0, 1]".into()));
        }
        if self.min_tokens_kept < 1 {
            return Err(Error::Config("min_tokens_kept must be at least 1".into()));
        }
        Ok(())
    }

    /// Word drop, then span drop gated by `span_drop_prob`, on one RNG
    /// stream.
    pub fn apply(&self, tokens: &[String], rng: &mut ChaCha12Rng) -> Vec<String> {
        let tokens = word_drop(tokens, self.word_drop_prob, self.min_tokens_kept, rng);
        if rng.gen_bool(self.span_drop_prob) {
            span_drop(&tokens, self.max_span_fraction, self.min_tokens_kept, rng)
        } else {
            tokens
        }
    }
}

/// Removes each token independently with probability `p`, preserving order.
/// If too few tokens survive, randomly chosen dropped tokens are restored
/// until `min_kept` (capped at the input length) remain.
pub fn word_drop(
    tokens: &[String],
    p: f64,
    min_kept: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<String> {
    let floor = min_kept.min(tokens.len());
    let mut keep: Vec<bool> = tokens.iter().map(|_| !rng.gen_bool(p)).collect();
    let mut kept = keep.iter().filter(|&&k| k).count();
    while kept < floor {
        let dropped: Vec<usize> = (0..tokens.len()).filter(|&i| !keep[i]).collect();
        let restore = dropped[rng.gen_range(0..dropped.len())];
        keep[restore] = true;
        kept += 1;
    }
    tokens
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(t, _)| t.clone())
        .collect()
}

/// Removes one contiguous span whose length is uniform in
/// `[1, ceil(max_span_fraction * n)]`, capped so at least `min_kept` tokens
/// survive. Inputs already at or below the floor pass through unchanged.
pub fn span_drop(
    tokens: &[String],
    max_span_fraction: f64,
    min_kept: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<String> {
    let n = tokens.len();
    let floor = min_kept.min(n);
    if n <= floor {
        return tokens.to_vec();
    }
    let max_span = ((max_span_fraction * n as f64).ceil() as usize).max(1);
    let span_len = rng.gen_range(1..=max_span).min(n - floor);
    let start = rng.gen_range(0..=n - span_len);
    let mut out = Vec::with_capacity(n - span_len);
    out.extend_from_slice(&tokens[..start]);
    out.extend_from_slice(&tokens[start + span_len..]);
    out
}
