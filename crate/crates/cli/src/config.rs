//! Run configuration.
//!
//! A TOML file of `key = value` pairs with one section per concern (and one
//! per training stage). Every key has a default except the global seed,
//! which must come from the file or `--seed`. Command-line `--set a.b=v`
//! overrides any key.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use tqe_core::datagen::{DegradeConfig, HttpProviderConfig};
use tqe_core::error::{Error, Result};
use tqe_core::model::ModelConfig;
use tqe_core::pipeline::StageKind;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub degrade: DegradeSection,
    pub provider: ProviderSection,
    pub model: ModelSection,
    pub label: LabelSection,
    pub prune: PruneSection,
    pub stages: BTreeMap<String, StageSection>,
    pub cv: CvSection,
    pub ensemble: EnsembleSection,
    pub evaluate: EvaluateSection,
    pub report: ReportSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DegradeSection {
    pub word_drop_prob: f64,
    pub span_drop_prob: f64,
    pub max_span_fraction: f64,
    pub min_tokens_kept: usize,
}

impl Default for DegradeSection {
    fn default() -> Self {
        let d = DegradeConfig::default();
        DegradeSection {
            word_drop_prob: d.word_drop_prob,
            span_drop_prob: d.span_drop_prob,
            max_span_fraction: d.max_span_fraction,
            min_tokens_kept: d.min_tokens_kept,
        }
    }
}

impl DegradeSection {
    pub fn to_config(&self) -> DegradeConfig {
        DegradeConfig {
            word_drop_prob: self.word_drop_prob,
            span_drop_prob: self.span_drop_prob,
            max_span_fraction: self.max_span_fraction,
            min_tokens_kept: self.min_tokens_kept,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProviderSection {
    /// "offline" or "http".
    pub kind: String,
    pub endpoint: String,
    pub timeout_ms: u64,
    pub retries: u32,
}

impl Default for ProviderSection {
    fn default() -> Self {
        let d = HttpProviderConfig::default();
        ProviderSection {
            kind: "offline".into(),
            endpoint: d.endpoint,
            timeout_ms: d.timeout_ms,
            retries: d.retries,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub d: usize,
    pub vocab_buckets: u32,
    pub head_dims: Vec<usize>,
    pub lr_encoder: f64,
    pub lr_head: f64,
    /// Initialization seed; derived from the global seed when absent.
    pub seed: Option<u64>,
    pub encoder_kind: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::desk();
        ModelSection {
            d: d.d,
            vocab_buckets: d.vocab_buckets,
            head_dims: d.head_dims,
            lr_encoder: d.lr_encoder,
            lr_head: d.lr_head,
            seed: None,
            encoder_kind: d.encoder_kind,
        }
    }
}

impl ModelSection {
    pub fn to_config(&self, fallback_seed: u64) -> ModelConfig {
        ModelConfig {
            d: self.d,
            vocab_buckets: self.vocab_buckets,
            head_dims: self.head_dims.clone(),
            lr_encoder: self.lr_encoder,
            lr_head: self.lr_head,
            seed: self.seed.unwrap_or(fallback_seed),
            encoder_kind: self.encoder_kind.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelSection {
    /// Scorer specs: "overlap" or "ckpt:<path>".
    pub scorers: Vec<String>,
    /// Input format scorers see: src, ref, or src_ref.
    pub format: String,
}

impl Default for LabelSection {
    fn default() -> Self {
        LabelSection {
            scorers: vec!["overlap".into()],
            format: "src_ref".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PruneSection {
    pub drop_ratios: Vec<f64>,
}

impl Default for PruneSection {
    fn default() -> Self {
        PruneSection {
            drop_ratios: tqe_core::datagen::PAPER_DROP_RATIOS.to_vec(),
        }
    }
}

impl PruneSection {
    pub fn ratios(&self) -> Result<[f64; 5]> {
        <[f64; 5]>::try_from(self.drop_ratios.as_slice()).map_err(|_| {
            Error::Config(format!(
                "prune.drop_ratios needs exactly 5 values, got {}",
                self.drop_ratios.len()
            ))
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageSection {
    pub data: Option<PathBuf>,
    /// Defaults to the provenance the stage expects.
    pub provenance: Option<String>,
    /// "multi", "src", "ref", or "src_ref"; defaults by stage.
    pub formats: Option<String>,
    pub epochs: usize,
    pub batch_size: usize,
    /// Default to the model section's rates.
    pub lr_encoder: Option<f64>,
    pub lr_head: Option<f64>,
    /// finetune_dev only: run 5-fold cross-validation first.
    pub cv: bool,
}

impl Default for StageSection {
    fn default() -> Self {
        StageSection {
            data: None,
            provenance: None,
            formats: None,
            epochs: 1,
            batch_size: 16,
            lr_encoder: None,
            lr_head: None,
            cv: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvSection {
    pub grid_epochs: Vec<usize>,
    pub grid_lr_head: Vec<f64>,
    pub batch_size: usize,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            grid_epochs: vec![2, 5],
            grid_lr_head: vec![1e-2, 3e-3],
            batch_size: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub members: Vec<PathBuf>,
    pub rule: String,
    /// 0 disables member pre-selection.
    pub select_top_k: usize,
    pub dev: Option<PathBuf>,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        EnsembleSection {
            members: vec![],
            rule: "z-mean".into(),
            select_top_k: 0,
            dev: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateSection {
    pub mode: String,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            mode: "pooled".into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    /// Empty means: 21 evenly spaced thresholds over the score range.
    pub thresholds: Vec<f64>,
}

impl RunConfig {
    /// Loads a config file (or defaults when none given), applies `--set`
    /// overrides, then the `--seed` override.
    pub fn load(
        path: Option<&PathBuf>,
        overrides: &[String],
        seed_flag: Option<u64>,
    ) -> Result<RunConfig> {
        let mut value: toml::Value = match path {
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                let table: toml::Table = text
                    .parse()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                toml::Value::Table(table)
            }
            None => toml::Value::Table(Default::default()),
        };

        for raw in overrides {
            apply_override(&mut value, raw)?;
        }

        let mut config: RunConfig = value
            .try_into()
            .map_err(|e| Error::Config(format!("bad configuration: {e}")))?;
        if let Some(seed) = seed_flag {
            config.seed = Some(seed);
        }
        for key in config.stages.keys() {
            StageKind::parse(key)?;
        }
        Ok(config)
    }

    /// The mandatory global seed.
    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (config `seed` or --seed)".into()))
    }

    pub fn stage_section(&self, kind: StageKind) -> StageSection {
        self.stages.get(kind.name()).cloned().unwrap_or_default()
    }
}

/// Applies one `dotted.path=value` override onto the parsed TOML tree.
fn apply_override(root: &mut toml::Value, raw: &str) -> Result<()> {
    let (path, literal) = raw
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{raw}'")))?;
    let parsed: toml::Value = format!("v = {literal}")
        .parse::<toml::Table>()
        .map(|t| t["v"].clone())
        .or_else(|_| {
            format!("v = \"{literal}\"")
                .parse::<toml::Table>()
                .map(|t| t["v"].clone())
        })
        .map_err(|e| Error::Config(format!("--set {raw}: bad value: {e}")))?;

    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("--set {raw}: empty key segment")));
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("--set {raw}: '{key}' is not a table")))?;
        node = table
            .entry((*key).to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("--set {raw}: parent is not a table")))?;
    table.insert(keys[keys.len() - 1].to_string(), parsed);
    Ok(())
}
