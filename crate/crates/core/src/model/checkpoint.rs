//! Checkpoint files.
//!
//! A checkpoint is a self-describing, versioned binary container holding the
//! model configuration, training provenance, and every numeric buffer
//! (parameters and optimizer moments) bit-for-bit. Loading a checkpoint and
//! predicting gives byte-identical results to the state that was saved.
//!
//! Byte layout, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "TQECKPT1"
//! 8       4     format version (u32), currently 1
//! 12      4     metadata length L (u32)
//! 16      L     metadata: UTF-8 JSON {config, stage, data_hash, seed, extra, step}
//! ..      4     section count (u32)
//! per section:
//!         4     name length N (u32)
//!         N     section name, UTF-8 (e.g. "embedding", "adam.m.head.0.weight")
//!         8     element count C (u64)
//!         8*C   elements, f64 raw bits
//! end:    32    SHA-256 of every preceding byte
//! ```
//!
//! Sections appear in a fixed order: the parameter sections (`embedding`,
//! `encoder.weight`, `encoder.bias`, `head.{i}.weight`, `head.{i}.bias`),
//! then the same names under `adam.m.` and `adam.v.` prefixes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::params::ModelParams;
use crate::model::{AdamState, ModelConfig, ModelState, TrainingMeta};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"TQECKPT1";
const CHECKSUM_LEN: usize = 32;

#[derive(Serialize, Deserialize)]
struct CheckpointMeta {
    config: ModelConfig,
    #[serde(default)]
    stage: Option<String>,
    #[serde(default)]
    data_hash: Option<String>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    extra: BTreeMap<String, String>,
    step: u64,
}

fn push_section(out: &mut Vec<u8>, name: &str, values: &[f64]) {
    out.extend_from_slice(&(name.len() as u32).to_le_bytes());
    out.extend_from_slice(name.as_bytes());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_checkpoint(state: &ModelState, path: &Path) -> Result<()> {
    let meta = CheckpointMeta {
        config: state.config.clone(),
        stage: state.meta.stage.clone(),
        data_hash: state.meta.data_hash.clone(),
        seed: state.meta.seed,
        extra: state.meta.extra.clone(),
        step: state.adam.step,
    };
    let meta_json = serde_json::to_vec(&meta).expect("metadata serialization cannot fail");

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta_json);

    let params = state.params.sections();
    let m = state.adam.m.sections();
    let v = state.adam.v.sections();
    out.extend_from_slice(&((params.len() * 3) as u32).to_le_bytes());
    for (name, values) in &params {
        push_section(&mut out, name, values);
    }
    for (name, values) in &m {
        push_section(&mut out, &format!("adam.m.{name}"), values);
    }
    for (name, values) in &v {
        push_section(&mut out, &format!("adam.v.{name}"), values);
    }

    let checksum = Sha256::digest(&out);
    out.extend_from_slice(&checksum);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn corrupt(&self, msg: impl Into<String>) -> Error {
        Error::CheckpointCorrupt(format!("{}: {}", self.path.display(), msg.into()))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.corrupt("file truncated"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn read_section_into(reader: &mut Reader, expected_name: &str, target: &mut [f64]) -> Result<()> {
    let name_len = reader.u32()? as usize;
    let name = std::str::from_utf8(reader.take(name_len)?)
        .map_err(|_| reader.corrupt("section name is not UTF-8"))?
        .to_string();
    if name != expected_name {
        return Err(reader.corrupt(format!(
            "unexpected section '{name}' (expected '{expected_name}')"
        )));
    }
    let count = reader.u64()? as usize;
    if count != target.len() {
        return Err(reader.corrupt(format!(
            "section '{name}' holds {count} elements, config implies {}",
            target.len()
        )));
    }
    for t in target.iter_mut() {
        *t = f64::from_le_bytes(reader.take(8)?.try_into().expect("8 bytes"));
    }
    Ok(())
}

fn read_params_into(reader: &mut Reader, prefix: &str, params: &mut ModelParams) -> Result<()> {
    let names: Vec<String> = params
        .sections()
        .iter()
        .map(|(name, _)| format!("{prefix}{name}"))
        .collect();
    for ((_, values), name) in params.sections_mut().into_iter().zip(&names) {
        read_section_into(reader, name, values)?;
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelState> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < MAGIC.len() + 4 + CHECKSUM_LEN {
        return Err(Error::CheckpointCorrupt(format!(
            "{}: file too short",
            path.display()
        )));
    }
    let (body, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(Error::CheckpointCorrupt(format!(
            "{}: checksum mismatch",
            path.display()
        )));
    }

    let mut reader = Reader {
        bytes: body,
        pos: 0,
        path,
    };
    if reader.take(MAGIC.len())? != MAGIC {
        return Err(reader.corrupt("bad magic; not a checkpoint file"));
    }
    let version = reader.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let meta_len = reader.u32()? as usize;
    let meta: CheckpointMeta = serde_json::from_slice(reader.take(meta_len)?)
        .map_err(|e| reader.corrupt(format!("bad metadata: {e}")))?;
    meta.config.validate()?;

    let mut params = ModelParams::init(&meta.config).zeros_like();
    let mut adam = AdamState::new(&params);
    let section_count = reader.u32()? as usize;
    let expected = params.sections().len() * 3;
    if section_count != expected {
        return Err(reader.corrupt(format!(
            "{section_count} sections, config implies {expected}"
        )));
    }
    read_params_into(&mut reader, "", &mut params)?;
    read_params_into(&mut reader, "adam.m.", &mut adam.m)?;
    read_params_into(&mut reader, "adam.v.", &mut adam.v)?;
    adam.step = meta.step;
    if reader.pos != body.len() {
        return Err(reader.corrupt("trailing bytes after last section"));
    }

    Ok(ModelState {
        config: meta.config,
        params,
        adam,
        meta: TrainingMeta {
            stage: meta.stage,
            data_hash: meta.data_hash,
            seed: meta.seed,
            extra: meta.extra,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Dataset, InputFormat, Provenance};
    use crate::model::train::{encode_batch, train_step};
    use crate::model::ModelState;

    fn trained_state() -> ModelState {
        let mut state = ModelState::new(ModelConfig {
            d: 8,
            vocab_buckets: 64,
            head_dims: vec![6, 1],
            seed: 5,
            ..ModelConfig::desk()
        })
        .unwrap();
        let vocab = state.vocabulary();
        let mut examples = Vec::new();
        for i in 0..6 {
            let mut ex = crate::model::tests::example(
                &format!("e{i}"),
                "wort eins zwei",
                "word one two",
                Some("word one two"),
            );
            ex.score = Some(0.1 * i as f64);
            examples.push(ex);
        }
        let b_ref = encode_batch(&examples[..2], InputFormat::Ref, &vocab).unwrap();
        let b_src = encode_batch(&examples[2..4], InputFormat::Src, &vocab).unwrap();
        let b_sr = encode_batch(&examples[4..], InputFormat::SrcRef, &vocab).unwrap();
        train_step(&mut state, &b_ref, &b_src, &b_sr).unwrap();
        state.meta.stage = Some("pretrain".into());
        state.meta.data_hash = Some("abc123".into());
        state.meta.seed = 99;
        state.meta.extra.insert("note".into(), "first".into());
        state
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let state = trained_state();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(&state, file.path()).unwrap();
        let loaded = load_checkpoint(file.path()).unwrap();
        assert_eq!(loaded, state);

        let ds = Dataset::new(
            vec![crate::model::tests::example("p", "wort zwei", "word two", None)],
            Provenance::Dev,
        )
        .unwrap();
        let before = state.predict(&ds, InputFormat::Src).unwrap();
        let after = loaded.predict(&ds, InputFormat::Src).unwrap();
        assert_eq!(before[0].to_bits(), after[0].to_bits());
    }

    #[test]
    fn metadata_survives_round_trip() {
        let state = trained_state();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(&state, file.path()).unwrap();
        let loaded = load_checkpoint(file.path()).unwrap();
        assert_eq!(loaded.meta.stage.as_deref(), Some("pretrain"));
        assert_eq!(loaded.meta.seed, 99);
        assert_eq!(loaded.meta.extra["note"], "first");
        assert_eq!(loaded.adam.step, 1);
    }

    #[test]
    fn wrong_version_names_both_versions() {
        let state = trained_state();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(&state, file.path()).unwrap();

        let mut bytes = fs::read(file.path()).unwrap();
        bytes[8..12].copy_from_slice(&7u32.to_le_bytes());
        let body_len = bytes.len() - CHECKSUM_LEN;
        let checksum = Sha256::digest(&bytes[..body_len]);
        bytes[body_len..].copy_from_slice(&checksum);
        fs::write(file.path(), bytes).unwrap();

        let err = load_checkpoint(file.path()).unwrap_err();
        match err {
            Error::CheckpointVersion { found, supported } => {
                assert_eq!((found, supported), (7, CHECKPOINT_VERSION));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn corruption_is_detected() {
        let state = trained_state();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(&state, file.path()).unwrap();
        let mut bytes = fs::read(file.path()).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        fs::write(file.path(), bytes).unwrap();
        let err = load_checkpoint(file.path()).unwrap_err();
        assert!(matches!(err, Error::CheckpointCorrupt(_)), "{err}");
    }

    #[test]
    fn truncation_is_detected() {
        let state = trained_state();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(&state, file.path()).unwrap();
        let bytes = fs::read(file.path()).unwrap();
        fs::write(file.path(), &bytes[..bytes.len() / 3]).unwrap();
        assert!(load_checkpoint(file.path()).is_err());
    }
}
