//! Construction of the three unified input formats.
//!
//! All formats pair the hypothesis with one or both of source and
//! reference, separated by doubled separator tokens:
//!
//! ```text
//! SRC      [CLS] h… [SEP] [SEP] s… [SEP]
//! REF      [CLS] h… [SEP] [SEP] r… [SEP]
//! SRC+REF  [CLS] h… [SEP] [SEP] s… [SEP] [SEP] r… [SEP]
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Example, Vocabulary, CLS_ID, SEP_ID};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputFormat {
    Src,
    Ref,
    SrcRef,
}

impl InputFormat {
    pub const ALL: [InputFormat; 3] = [InputFormat::Ref, InputFormat::Src, InputFormat::SrcRef];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "src" => Ok(InputFormat::Src),
            "ref" => Ok(InputFormat::Ref),
            "src_ref" | "src-ref" | "srcref" => Ok(InputFormat::SrcRef),
            other => Err(Error::Config(format!(
                "unknown input format '{other}' (expected src|ref|src_ref)"
            ))),
        }
    }

    /// Count of special tokens (CLS plus separators) in this layout.
    pub fn special_token_count(&self) -> usize {
        match self {
            InputFormat::Src | InputFormat::Ref => 4,
            InputFormat::SrcRef => 6,
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InputFormat::Src => "src",
            InputFormat::Ref => "ref",
            InputFormat::SrcRef => "src_ref",
        };
        f.write_str(s)
    }
}

/// A token-id encoding of one example in one input format. Segment lengths
/// count content tokens only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub ids: Vec<u32>,
    pub format: InputFormat,
    pub hyp_len: usize,
    pub src_len: usize,
    pub ref_len: usize,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Position of the CLS token, whose encoder output is the pooled
    /// sequence representation.
    pub fn cls_position(&self) -> usize {
        0
    }
}

/// Encodes one example in the requested format.
pub fn build_input(example: &Example, format: InputFormat, vocab: &Vocabulary) -> Result<Sequence> {
    let hyp = vocab.encode(&example.hyp);
    if hyp.is_empty() {
        return Err(Error::Data(format!(
            "example '{}' has an empty hypothesis",
            example.id
        )));
    }
    let src = vocab.encode(&example.src);
    let reference = match format {
        InputFormat::Src => None,
        InputFormat::Ref | InputFormat::SrcRef => match &example.reference {
            Some(r) => Some(vocab.encode(r)),
            None => {
                return Err(Error::Data(format!(
                    "example '{}' has no reference but format {format} requires one",
                    example.id
                )))
            }
        },
    };

    let mut ids = Vec::with_capacity(hyp.len() + src.len() + 8);
    ids.push(CLS_ID);
    ids.extend_from_slice(&hyp);
    ids.push(SEP_ID);
    ids.push(SEP_ID);

    let (src_len, ref_len) = match format {
        InputFormat::Src => {
            ids.extend_from_slice(&src);
            ids.push(SEP_ID);
            (src.len(), 0)
        }
        InputFormat::Ref => {
            let r = reference.as_ref().expect("checked above");
            ids.extend_from_slice(r);
            ids.push(SEP_ID);
            (0, r.len())
        }
        InputFormat::SrcRef => {
            let r = reference.as_ref().expect("checked above");
            ids.extend_from_slice(&src);
            ids.push(SEP_ID);
            ids.push(SEP_ID);
            ids.extend_from_slice(r);
            ids.push(SEP_ID);
            (src.len(), r.len())
        }
    };

    Ok(Sequence {
        ids,
        format,
        hyp_len: hyp.len(),
        src_len,
        ref_len,
    })
}
