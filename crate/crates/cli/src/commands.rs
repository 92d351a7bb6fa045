//! Command implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use tqe_core::corpus::{
    load_dataset, save_dataset, split_three_way, Dataset, FileFormat, InputFormat, Provenance,
};
use tqe_core::datagen::{
    aggregate, bin_prune, label, renormalize, synthesize, CheckpointScorer, HttpProvider,
    HttpProviderConfig, OfflineProvider, OverlapScorer, ScoreMatrix, Scorer, TranslationProvider,
};
use tqe_core::error::{Error, Result};
use tqe_core::eval::{cdf_report, evaluate, EvalMode};
use tqe_core::model::{load_checkpoint, ModelState};
use tqe_core::pipeline::{
    ensemble_predict, final_finetune, kfold_cv, run_stage, select_top_k, CombinationRule,
    CvOptions, EnsembleSpec, FormatPlan, HyperPoint, StageKind, StageSpec,
};
use tqe_core::seeding;

use crate::config::RunConfig;
use crate::manifest::Manifest;

fn file_format(flag: Option<&str>, path: &Path) -> Result<FileFormat> {
    match flag {
        Some(s) => FileFormat::parse(s),
        None => Ok(FileFormat::from_path(path)),
    }
}

fn load(path: &Path, flag: Option<&str>, provenance: Provenance) -> Result<Dataset> {
    load_dataset(path, file_format(flag, path)?, provenance)
}

fn save(dataset: &Dataset, path: &Path, flag: Option<&str>) -> Result<()> {
    save_dataset(dataset, path, file_format(flag, path)?)
}

fn command_seed(config: &RunConfig, label: &str) -> Result<u64> {
    Ok(seeding::mix(config.seed()?, seeding::hash_label(label)))
}

// ---------------------------------------------------------------------------
// Prediction and score-matrix files

/// Writes predictions as a two-column TSV `id<TAB>score`.
fn write_predictions(path: &Path, ids: &[String], scores: &[f64]) -> Result<()> {
    let mut out = String::from("id\tscore\n");
    for (id, score) in ids.iter().zip(scores) {
        out.push_str(&format!("{id}\t{score}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_predictions(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some("id\tscore") => {}
        _ => {
            return Err(Error::Malformed {
                path: path.display().to_string(),
                line: 1,
                field: None,
                msg: "expected header 'id\\tscore'".into(),
            })
        }
    }
    let mut map = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (id, score) = line.split_once('\t').ok_or_else(|| Error::Malformed {
            path: path.display().to_string(),
            line: i + 2,
            field: None,
            msg: "expected two tab-separated columns".into(),
        })?;
        let score: f64 = score.parse().map_err(|_| Error::Malformed {
            path: path.display().to_string(),
            line: i + 2,
            field: Some("score".into()),
            msg: format!("'{score}' is not a number"),
        })?;
        if map.insert(id.to_string(), score).is_some() {
            return Err(Error::Data(format!("duplicate prediction id '{id}'")));
        }
    }
    Ok(map)
}

/// Writes a score matrix as TSV: `id` column then one column per scorer.
fn write_matrix(path: &Path, matrix: &ScoreMatrix) -> Result<()> {
    let mut out = String::from("id");
    for name in matrix.scorer_names() {
        out.push('\t');
        out.push_str(&name.replace('\t', " "));
    }
    out.push('\n');
    for (i, id) in matrix.ids().iter().enumerate() {
        out.push_str(id);
        for j in 0..matrix.n_scorers() {
            out.push_str(&format!("\t{}", matrix.get(i, j)));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_matrix(path: &Path) -> Result<ScoreMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Malformed {
        path: path.display().to_string(),
        line: 1,
        field: None,
        msg: "empty matrix file".into(),
    })?;
    let mut columns = header.split('\t');
    if columns.next() != Some("id") {
        return Err(Error::Malformed {
            path: path.display().to_string(),
            line: 1,
            field: None,
            msg: "matrix header must start with 'id'".into(),
        });
    }
    let names: Vec<String> = columns.map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        ids.push(cols.next().unwrap_or_default().to_string());
        let mut row = 0;
        for col in cols {
            let v: f64 = col.parse().map_err(|_| Error::Malformed {
                path: path.display().to_string(),
                line: i + 2,
                field: None,
                msg: format!("'{col}' is not a number"),
            })?;
            values.push(v);
            row += 1;
        }
        if row != names.len() {
            return Err(Error::Malformed {
                path: path.display().to_string(),
                line: i + 2,
                field: None,
                msg: format!("expected {} scorer columns, found {row}", names.len()),
            });
        }
    }
    ScoreMatrix::new(ids, names, values)
}

// ---------------------------------------------------------------------------
// Commands

pub fn synth(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    out: &Path,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let parallel = load(input, format, Provenance::Synthetic)?;
    let degrade = config.degrade.to_config();
    let provider: Box<dyn TranslationProvider> = match config.provider.kind.as_str() {
        "offline" => Box::new(OfflineProvider),
        "http" => Box::new(HttpProvider::new(HttpProviderConfig {
            endpoint: config.provider.endpoint.clone(),
            timeout_ms: config.provider.timeout_ms,
            retries: config.provider.retries,
        })?),
        other => {
            return Err(Error::Config(format!(
                "unknown provider kind '{other}' (expected offline|http)"
            )))
        }
    };
    let seed = command_seed(config, "synth")?;
    let synthetic = synthesize(&parallel, provider.as_ref(), &degrade, seed)?;
    save(&synthetic, out, format)?;
    manifest.note(format!("synthesized: {} examples", synthetic.len()));
    manifest.output(out);
    Ok(())
}

fn build_scorers(config: &RunConfig) -> Result<Vec<Box<dyn Scorer>>> {
    let mut scorers: Vec<Box<dyn Scorer>> = Vec::new();
    for spec in &config.label.scorers {
        if spec == "overlap" {
            scorers.push(Box::new(OverlapScorer));
        } else if let Some(path) = spec.strip_prefix("ckpt:") {
            scorers.push(Box::new(CheckpointScorer::load(Path::new(path))?));
        } else {
            return Err(Error::Config(format!(
                "unknown scorer '{spec}' (expected 'overlap' or 'ckpt:<path>')"
            )));
        }
    }
    Ok(scorers)
}

pub fn label_cmd(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    out: &Path,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let dataset = load(input, format, Provenance::Synthetic)?;
    let scorers = build_scorers(config)?;
    let score_format = InputFormat::parse(&config.label.format)?;
    let matrix = label(&dataset, &scorers, score_format)?;
    write_matrix(out, &matrix)?;
    manifest.note(format!(
        "labeled: {} examples x {} scorers",
        matrix.n_examples(),
        matrix.n_scorers()
    ));
    manifest.output(out);
    Ok(())
}

pub fn normalize(
    manifest: &mut Manifest,
    input: &Path,
    out: &Path,
    matrix_path: Option<&Path>,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let mut dataset = load(input, format, Provenance::Synthetic)?;
    match matrix_path {
        Some(mp) => {
            manifest.input(mp)?;
            let matrix = read_matrix(mp)?;
            // Reorder matrix rows to dataset order; id sets must agree.
            let row_of: BTreeMap<&str, usize> = matrix
                .ids()
                .iter()
                .enumerate()
                .map(|(i, id)| (id.as_str(), i))
                .collect();
            if matrix.ids().len() != dataset.len() {
                return Err(Error::Data(format!(
                    "matrix covers {} ids, dataset has {}",
                    matrix.ids().len(),
                    dataset.len()
                )));
            }
            let mut order = Vec::with_capacity(dataset.len());
            for ex in &dataset.examples {
                match row_of.get(ex.id.as_str()) {
                    Some(&row) => order.push(row),
                    None => {
                        return Err(Error::Data(format!(
                            "matrix has no row for example '{}'",
                            ex.id
                        )))
                    }
                }
            }
            let aligned_values: Vec<f64> = order
                .iter()
                .flat_map(|&row| (0..matrix.n_scorers()).map(move |j| (row, j)))
                .map(|(row, j)| matrix.get(row, j))
                .collect();
            let aligned = ScoreMatrix::new(
                dataset.examples.iter().map(|e| e.id.clone()).collect(),
                matrix.scorer_names().to_vec(),
                aligned_values,
            )?;
            let scores = aggregate(&aligned)?;
            for (ex, q) in dataset.examples.iter_mut().zip(scores) {
                ex.score = Some(q);
            }
            manifest.note("normalized: aggregated scorer matrix (rank-z per scorer, mean per example)".to_string());
        }
        None => {
            dataset = renormalize(&dataset)?;
            manifest.note("normalized: rank-z per language pair".to_string());
        }
    }
    save(&dataset, out, format)?;
    manifest.output(out);
    Ok(())
}

pub fn prune(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    out: &Path,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let dataset = load(input, format, Provenance::Synthetic)?;
    let ratios = config.prune.ratios()?;
    let seed = command_seed(config, "prune")?;
    let pruned = bin_prune(&dataset, &ratios, seed)?;
    save(&pruned, out, format)?;
    manifest.note(format!("pruned: {} -> {} examples", dataset.len(), pruned.len()));
    manifest.output(out);
    Ok(())
}

pub fn split(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    out_dir: &Path,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let dataset = load(input, format, Provenance::Synthetic)?;
    let seed = command_seed(config, "split")?;
    let (part_ref, part_src, part_src_ref) = split_three_way(&dataset, seed)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let ext = match file_format(format, input)? {
        FileFormat::Tsv => "tsv",
        FileFormat::Jsonl => "jsonl",
    };
    for (part, name) in [
        (&part_ref, "part-ref"),
        (&part_src, "part-src"),
        (&part_src_ref, "part-srcref"),
    ] {
        let path = out_dir.join(format!("{name}.{ext}"));
        save(part, &path, format)?;
        manifest.output(&path);
    }
    Ok(())
}

fn init_state(config: &RunConfig, init_from: Option<&Path>) -> Result<ModelState> {
    match init_from {
        Some(path) => load_checkpoint(path),
        None => {
            let fallback = seeding::mix(config.seed()?, seeding::hash_label("model-init"));
            ModelState::new(config.model.to_config(fallback))
        }
    }
}

pub fn train(
    config: &RunConfig,
    manifest: &mut Manifest,
    stage_name: &str,
    out: &Path,
    data_override: Option<&Path>,
    init_from: Option<&Path>,
    format: Option<&str>,
) -> Result<()> {
    let kind = StageKind::parse(stage_name)?;
    let section = config.stage_section(kind);
    let data_path = data_override
        .map(Path::to_path_buf)
        .or_else(|| section.data.clone())
        .ok_or_else(|| {
            Error::Config(format!(
                "no dataset for stage {kind}: set [stages.{kind}] data or pass --data"
            ))
        })?;
    let provenance = match &section.provenance {
        Some(p) => Provenance::parse(p)?,
        None => kind.expected_provenance(),
    };
    manifest.input(&data_path)?;
    if let Some(p) = init_from {
        manifest.input(p)?;
    }
    let dataset = load(&data_path, format, provenance)?;
    let state = init_state(config, init_from)?;

    let formats = match &section.formats {
        Some(f) => FormatPlan::parse(f)?,
        None => kind.default_formats(),
    };
    let stage_seed = command_seed(config, kind.name())?;

    if kind == StageKind::FinetuneDev && section.cv {
        let grid: Vec<HyperPoint> = config
            .cv
            .grid_epochs
            .iter()
            .flat_map(|&epochs| {
                config
                    .cv
                    .grid_lr_head
                    .iter()
                    .map(move |&lr_head| HyperPoint { epochs, lr_head })
            })
            .collect();
        let opts = CvOptions {
            batch_size: config.cv.batch_size,
            seed: seeding::mix(stage_seed, seeding::hash_label("cv")),
        };
        let results = kfold_cv(&dataset, &grid, &state, &opts)?;
        for r in &results {
            manifest.note(format!(
                "cv: epochs={} lr_head={} mean_spearman={:.4} folds={:?}",
                r.point.epochs,
                r.point.lr_head,
                r.mean_spearman,
                r.fold_spearman
                    .iter()
                    .map(|v| (v * 1e4).round() / 1e4)
                    .collect::<Vec<_>>()
            ));
        }
        let best = results[0].point;
        manifest.note(format!(
            "cv best: epochs={} lr_head={}",
            best.epochs, best.lr_head
        ));
        let tuned = final_finetune(&state, &dataset, &best, &opts)?;
        tqe_core::model::save_checkpoint(&tuned, out)?;
    } else {
        let spec = StageSpec {
            kind,
            formats,
            epochs: section.epochs,
            batch_size: section.batch_size,
            lr_encoder: section.lr_encoder.unwrap_or(config.model.lr_encoder),
            lr_head: section.lr_head.unwrap_or(config.model.lr_head),
            seed: stage_seed,
        };
        run_stage(state, &spec, &dataset, out)?;
        manifest.note(format!(
            "trained: stage={kind} epochs={} batch_size={} formats={formats}",
            spec.epochs, spec.batch_size
        ));
    }
    manifest.output(out);
    Ok(())
}

pub fn predict(
    manifest: &mut Manifest,
    ckpt: &Path,
    input: &Path,
    out: &Path,
    input_format: Option<&str>,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(ckpt)?;
    manifest.input(input)?;
    let state = load_checkpoint(ckpt)?;
    let dataset = load(input, format, Provenance::Test)?;
    let seq_format = match input_format {
        Some(s) => InputFormat::parse(s)?,
        None => InputFormat::Src,
    };
    let preds = state.predict(&dataset, seq_format)?;
    let ids: Vec<String> = dataset.examples.iter().map(|e| e.id.clone()).collect();
    write_predictions(out, &ids, &preds)?;
    manifest.output(out);
    Ok(())
}

pub fn ensemble(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    out: &Path,
    members_flag: &[PathBuf],
    select_flag: Option<usize>,
    dev_flag: Option<&Path>,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let dataset = load(input, format, Provenance::Test)?;
    let mut members: Vec<PathBuf> = if members_flag.is_empty() {
        config.ensemble.members.clone()
    } else {
        members_flag.to_vec()
    };
    if members.is_empty() {
        return Err(Error::Config(
            "no ensemble members: set [ensemble] members or pass --members".into(),
        ));
    }
    for m in &members {
        manifest.input(m)?;
    }

    let top_k = select_flag.unwrap_or(config.ensemble.select_top_k);
    if top_k > 0 {
        let dev_path = dev_flag
            .map(Path::to_path_buf)
            .or_else(|| config.ensemble.dev.clone())
            .ok_or_else(|| {
                Error::Config("member selection needs a dev set (--dev or [ensemble] dev)".into())
            })?;
        manifest.input(&dev_path)?;
        let dev = load(&dev_path, format, Provenance::Dev)?;
        let ranked = select_top_k(&members, &dev, top_k)?;
        for (path, rho) in &ranked {
            manifest.note(format!("selected: {} dev_spearman={rho:.4}", path.display()));
        }
        members = ranked.into_iter().map(|(p, _)| p).collect();
    }

    let spec = EnsembleSpec {
        members,
        rule: CombinationRule::parse(&config.ensemble.rule)?,
    };
    let preds = ensemble_predict(&spec, &dataset)?;
    let ids: Vec<String> = dataset.examples.iter().map(|e| e.id.clone()).collect();
    write_predictions(out, &ids, &preds)?;
    manifest.output(out);
    Ok(())
}

pub fn evaluate_cmd(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    preds_path: &Path,
    out: &Path,
    mode_flag: Option<&str>,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    manifest.input(preds_path)?;
    let dataset = load(input, format, Provenance::Test)?;
    let preds_by_id = read_predictions(preds_path)?;
    if preds_by_id.len() != dataset.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} examples",
            preds_by_id.len(),
            dataset.len()
        )));
    }
    let mut preds = Vec::with_capacity(dataset.len());
    for ex in &dataset.examples {
        match preds_by_id.get(&ex.id) {
            Some(&p) => preds.push(p),
            None => {
                return Err(Error::Data(format!(
                    "no prediction for example '{}'",
                    ex.id
                )))
            }
        }
    }
    let mode = EvalMode::parse(mode_flag.unwrap_or(&config.evaluate.mode))?;
    let report = evaluate(
        &dataset,
        &preds,
        mode,
        &input.display().to_string(),
        &preds_path.display().to_string(),
    )?;
    let rendered = if out.extension().and_then(|e| e.to_str()) == Some("json") {
        report.to_json()
    } else {
        report.to_tsv()
    };
    std::fs::write(out, rendered).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    print!("{report}");
    manifest.output(out);
    Ok(())
}

pub fn report(
    config: &RunConfig,
    manifest: &mut Manifest,
    input: &Path,
    out: &Path,
    thresholds_flag: Option<&str>,
    format: Option<&str>,
) -> Result<()> {
    manifest.input(input)?;
    let dataset = load(input, format, Provenance::Test)?;
    let scores = dataset.scores()?;
    let thresholds: Vec<f64> = if let Some(raw) = thresholds_flag {
        raw.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad threshold '{t}'")))
            })
            .collect::<Result<_>>()?
    } else if !config.report.thresholds.is_empty() {
        config.report.thresholds.clone()
    } else {
        // 21 evenly spaced thresholds over the observed score range.
        let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if min == max {
            vec![min]
        } else {
            (0..=20).map(|i| min + (max - min) * i as f64 / 20.0).collect()
        }
    };
    let cdf = cdf_report(&scores, &thresholds)?;
    std::fs::write(out, cdf.to_tsv()).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    manifest.output(out);
    Ok(())
}
