//! Whitespace tokenization with a hash-bucket vocabulary.
//!
//! Tokens are lowercased whitespace-delimited words; ids are
//! `4 + fnv1a64(token) mod V`, so no vocabulary file exists and any token
//! maps to a stable id on every platform. Collisions are acceptable at this
//! scale. Ids 0..3 are reserved for the special tokens.

pub const CLS_ID: u32 = 0;
pub const SEP_ID: u32 = 1;
pub const UNK_ID: u32 = 2;
pub const PAD_ID: u32 = 3;

/// Number of reserved special-token ids.
pub const NUM_SPECIAL_IDS: u32 = 4;

/// Lowercase whitespace tokenization. Empty text gives an empty list.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(|t| t.to_lowercase()).collect()
}

/// Hash-bucket vocabulary: `bucket_count` content ids starting at
/// [`NUM_SPECIAL_IDS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocabulary {
    bucket_count: u32,
}

/// Default content-bucket count.
pub const DEFAULT_BUCKET_COUNT: u32 = 65_536;

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new(DEFAULT_BUCKET_COUNT)
    }
}

impl Vocabulary {
    pub fn new(bucket_count: u32) -> Self {
        assert!(bucket_count >= 1, "vocabulary needs at least one bucket");
        Vocabulary { bucket_count }
    }

    pub fn bucket_count(&self) -> u32 {
        self.bucket_count
    }

    /// Total id range, special ids included.
    pub fn id_count(&self) -> u32 {
        NUM_SPECIAL_IDS + self.bucket_count
    }

    /// Content id of one token.
    pub fn token_id(&self, token: &str) -> u32 {
        NUM_SPECIAL_IDS + (fnv1a64(token.as_bytes()) % u64::from(self.bucket_count)) as u32
    }

    /// Tokenizes and maps to ids in one pass.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        tokenize(text).iter().map(|t| self.token_id(t)).collect()
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
