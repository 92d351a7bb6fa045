//! Data model and corpus handling.
//!
//! An [`Example`] is one evaluation tuple ⟨hypothesis, source, reference,
//! score⟩ plus a language pair and id. A [`Dataset`] is an ordered list of
//! examples with a provenance tag. Submodules cover file I/O, three-way
//! splitting, tokenization, and input-sequence construction.

mod input;
mod io;
mod split;
mod tokenize;

pub use input::{build_input, InputFormat, Sequence};
pub use io::{load_dataset, save_dataset, FileFormat};
pub use split::split_three_way;
pub use tokenize::{tokenize, Vocabulary, CLS_ID, NUM_SPECIAL_IDS, PAD_ID, SEP_ID, UNK_ID};

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A translation direction, e.g. `en-de`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguagePair {
    source_language: String,
    target_language: String,
}

impl LanguagePair {
    pub fn new(source_language: &str, target_language: &str) -> Result<Self> {
        if source_language.is_empty() || target_language.is_empty() {
            return Err(Error::Data(format!(
                "language pair needs nonempty codes, got '{source_language}-{target_language}'"
            )));
        }
        Ok(LanguagePair {
            source_language: source_language.to_lowercase(),
            target_language: target_language.to_lowercase(),
        })
    }

    /// Parses the canonical `xx-yy` rendering.
    pub fn parse(s: &str) -> Result<Self> {
        match s.split_once('-') {
            Some((src, tgt)) => LanguagePair::new(src, tgt),
            None => Err(Error::Data(format!(
                "language pair '{s}' is not of the form 'xx-yy'"
            ))),
        }
    }

    pub fn source_language(&self) -> &str {
        &self.source_language
    }

    pub fn target_language(&self) -> &str {
        &self.target_language
    }
}

impl fmt::Display for LanguagePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.source_language, self.target_language)
    }
}

/// One evaluation tuple: hypothesis, source, optional reference, optional
/// (pseudo-)label. Unlabeled parallel data flows through synthesis with
/// `score: None` until labeling assigns one.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub lp: LanguagePair,
    pub src: String,
    pub hyp: String,
    pub reference: Option<String>,
    pub score: Option<f64>,
}

impl Example {
    /// Checks the fields a well-formed example must satisfy: a nonempty
    /// tokenized hypothesis and a finite score when one is present.
    pub fn validate(&self) -> Result<()> {
        if tokenize(&self.hyp).is_empty() {
            return Err(Error::Data(format!(
                "example '{}' has an empty hypothesis after tokenization",
                self.id
            )));
        }
        if let Some(score) = self.score {
            if !score.is_finite() {
                return Err(Error::Data(format!(
                    "example '{}' has a non-finite score",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Where a dataset came from; stages check this before training on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Synthetic,
    Da,
    Mqm,
    Dev,
    Test,
}

impl Provenance {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "synthetic" => Ok(Provenance::Synthetic),
            "da" => Ok(Provenance::Da),
            "mqm" => Ok(Provenance::Mqm),
            "dev" => Ok(Provenance::Dev),
            "test" => Ok(Provenance::Test),
            other => Err(Error::Config(format!(
                "unknown provenance '{other}' (expected synthetic|da|mqm|dev|test)"
            ))),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Synthetic => "synthetic",
            Provenance::Da => "da",
            Provenance::Mqm => "mqm",
            Provenance::Dev => "dev",
            Provenance::Test => "test",
        };
        f.write_str(s)
    }
}

/// An ordered collection of examples with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, provenance: Provenance) -> Result<Self> {
        let ds = Dataset {
            examples,
            provenance,
        };
        ds.check_unique_ids()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.examples.len());
        for ex in &self.examples {
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::Data(format!("duplicate example id '{}'", ex.id)));
            }
        }
        Ok(())
    }

    /// Errors unless every example carries a score.
    pub fn require_scores(&self) -> Result<()> {
        for ex in &self.examples {
            if ex.score.is_none() {
                return Err(Error::Data(format!("example '{}' has no score", ex.id)));
            }
        }
        Ok(())
    }

    /// Gold scores, in example order. Errors if any example is unscored.
    pub fn scores(&self) -> Result<Vec<f64>> {
        self.examples
            .iter()
            .map(|ex| {
                ex.score
                    .ok_or_else(|| Error::Data(format!("example '{}' has no score", ex.id)))
            })
            .collect()
    }

    /// Language pairs present, sorted, with their example counts.
    pub fn language_pairs(&self) -> Vec<(LanguagePair, usize)> {
        let mut counts: Vec<(LanguagePair, usize)> = Vec::new();
        for ex in &self.examples {
            match counts.iter_mut().find(|(lp, _)| *lp == ex.lp) {
                Some((_, n)) => *n += 1,
                None => counts.push((ex.lp.clone(), 1)),
            }
        }
        counts.sort_by(|a, b| a.0.cmp(&b.0));
        counts
    }

    /// SHA-256 over a canonical rendering of the examples; used to stamp
    /// checkpoints with the identity of their training data.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for ex in &self.examples {
            hasher.update(ex.id.as_bytes());
            hasher.update([0]);
            hasher.update(ex.lp.to_string().as_bytes());
            hasher.update([0]);
            hasher.update(ex.src.as_bytes());
            hasher.update([0]);
            hasher.update(ex.hyp.as_bytes());
            hasher.update([0]);
            if let Some(r) = &ex.reference {
                hasher.update(r.as_bytes());
            }
            hasher.update([0]);
            if let Some(q) = ex.score {
                hasher.update(q.to_le_bytes());
            }
            hasher.update([0xff]);
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example(id: &str, lp: &str, src: &str, hyp: &str) -> Example {
        Example {
            id: id.to_string(),
            lp: LanguagePair::parse(lp).unwrap(),
            src: src.to_string(),
            hyp: hyp.to_string(),
            reference: None,
            score: None,
        }
    }

    #[test]
    fn language_pair_renders_lowercase() {
        let lp = LanguagePair::new("EN", "De").unwrap();
        assert_eq!(lp.to_string(), "en-de");
    }

    #[test]
    fn language_pair_rejects_empty_codes() {
        assert!(LanguagePair::new("", "de").is_err());
        assert!(LanguagePair::parse("ende").is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let exs = vec![
            example("a", "en-de", "x", "y"),
            example("a", "en-de", "x", "z"),
        ];
        let err = Dataset::new(exs, Provenance::Dev).unwrap_err();
        assert!(err.to_string().contains("duplicate example id 'a'"));
    }

    #[test]
    fn content_hash_tracks_scores() {
        let mut ds = Dataset::new(vec![example("a", "en-de", "x", "y")], Provenance::Dev).unwrap();
        let h1 = ds.content_hash();
        ds.examples[0].score = Some(0.5);
        let h2 = ds.content_hash();
        assert_ne!(h1, h2);
        assert_eq!(h2.len(), 64);
    }
}
