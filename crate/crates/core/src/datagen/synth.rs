//! Synthetic example construction from parallel data.

use log::warn;

use crate::corpus::{tokenize, Dataset, Example, Provenance};
use crate::datagen::{DegradeConfig, TranslationProvider};
use crate::error::{Error, Result};
use crate::seeding;

/// Builds synthetic examples: each hypothesis is the provider's translation
/// of the source, degraded per `cfg`. Scores are left absent for a later
/// labeling pass.
///
/// Every input example must carry a reference. Failed translations are
/// skipped with a warning; if more than half fail, the whole run errors.
/// Per-example RNG substreams are keyed by (seed, example index), so results
/// do not depend on evaluation order.
pub fn synthesize(
    parallel: &Dataset,
    provider: &dyn TranslationProvider,
    cfg: &DegradeConfig,
    seed: u64,
) -> Result<Dataset> {
    cfg.validate()?;
    for ex in &parallel.examples {
        if ex.reference.is_none() {
            return Err(Error::Data(format!(
                "example '{}' has no reference; synthesis needs source-reference pairs",
                ex.id
            )));
        }
    }

    let mut out = Vec::with_capacity(parallel.len());
    let mut failures = 0usize;
    for (index, ex) in parallel.examples.iter().enumerate() {
        let reference = ex.reference.as_deref();
        let translated = match provider.translate(&ex.src, &ex.lp, reference) {
            Ok(t) => t,
            Err(e) => {
                warn!("skipping example '{}': provider failed: {e}", ex.id);
                failures += 1;
                continue;
            }
        };
        let tokens = tokenize(&translated);
        if tokens.is_empty() {
            warn!("skipping example '{}': provider returned empty text", ex.id);
            failures += 1;
            continue;
        }
        let mut rng = seeding::substream(seed, index as u64);
        let degraded = cfg.apply(&tokens, &mut rng);
        out.push(Example {
            id: ex.id.clone(),
            lp: ex.lp.clone(),
            src: ex.src.clone(),
            hyp: degraded.join(" "),
            reference: ex.reference.clone(),
            score: None,
        });
    }

    if !parallel.is_empty() && failures * 2 > parallel.len() {
        return Err(Error::Provider(format!(
            "{failures} of {} translations failed",
            parallel.len()
        )));
    }
    Dataset::new(out, Provenance::Synthetic)
}
