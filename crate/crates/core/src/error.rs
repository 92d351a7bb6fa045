//! Crate-wide error type.
//!
//! Variants are grouped by how a caller should react: `Config` means the
//! request itself was bad, `Io`/`Malformed`/`Data` mean the inputs were bad,
//! and `Numeric` means a computation degenerated (non-finite loss, undefined
//! correlation). The CLI maps these groups onto distinct exit codes.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record in an input file could not be parsed. `line` is 1-based and
    /// counts the header line of TSV files.
    #[error("{path}: line {line}{}: {msg}", field.as_ref().map(|f| format!(", field '{f}'")).unwrap_or_default())]
    Malformed {
        path: String,
        line: usize,
        field: Option<String>,
        msg: String,
    },

    /// Semantically invalid data: duplicate ids, missing scores, provenance
    /// mismatches, empty datasets where nonempty ones are required.
    #[error("data error: {0}")]
    Data(String),

    /// A computation produced or would produce an undefined or non-finite
    /// value.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint version mismatch: file declares version {found}, this build supports version {supported}")]
    CheckpointVersion { found: u32, supported: u32 },

    #[error("corrupt checkpoint: {0}")]
    CheckpointCorrupt(String),

    #[error("translation provider error: {0}")]
    Provider(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
