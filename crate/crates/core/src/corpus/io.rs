//! Dataset file I/O.
//!
//! Two formats are supported and round-trip losslessly:
//!
//! - TSV: UTF-8, LF line endings, header exactly
//!   `id<TAB>lp<TAB>src<TAB>mt<TAB>ref<TAB>score`. Absent reference/score
//!   render as empty columns. Tabs inside fields are rejected.
//! - JSONL: one object per line with keys `id`, `lp`, `src`, `mt`, `ref`,
//!   `score`; `ref` and `score` may be null.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Dataset, Example, LanguagePair, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Tsv,
    Jsonl,
}

impl FileFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(FileFormat::Tsv),
            "jsonl" => Ok(FileFormat::Jsonl),
            other => Err(Error::Config(format!(
                "unknown file format '{other}' (expected tsv|jsonl)"
            ))),
        }
    }

    /// Guesses from the extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => FileFormat::Jsonl,
            _ => FileFormat::Tsv,
        }
    }
}

const TSV_HEADER: &str = "id\tlp\tsrc\tmt\tref\tscore";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    id: String,
    lp: String,
    src: String,
    mt: String,
    #[serde(default)]
    r#ref: Option<String>,
    #[serde(default)]
    score: Option<f64>,
}

fn malformed(path: &Path, line: usize, field: Option<&str>, msg: impl Into<String>) -> Error {
    Error::Malformed {
        path: path.display().to_string(),
        line,
        field: field.map(str::to_string),
        msg: msg.into(),
    }
}

/// Reads a dataset, tagging it with the caller-declared provenance (the
/// files themselves do not carry one).
pub fn load_dataset(path: &Path, format: FileFormat, provenance: Provenance) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let examples = match format {
        FileFormat::Tsv => parse_tsv(path, &text)?,
        FileFormat::Jsonl => parse_jsonl(path, &text)?,
    };
    Dataset::new(examples, provenance)
}

fn parse_record_fields(
    path: &Path,
    line_no: usize,
    id: String,
    lp: String,
    src: String,
    mt: String,
    reference: Option<String>,
    score: Option<f64>,
) -> Result<Example> {
    if id.is_empty() {
        return Err(malformed(path, line_no, Some("id"), "empty id"));
    }
    let lp = LanguagePair::parse(&lp)
        .map_err(|e| malformed(path, line_no, Some("lp"), e.to_string()))?;
    if tokenize(&mt).is_empty() {
        return Err(malformed(
            path,
            line_no,
            Some("mt"),
            "hypothesis is empty after tokenization",
        ));
    }
    if let Some(q) = score {
        if !q.is_finite() {
            return Err(malformed(path, line_no, Some("score"), "score is not finite"));
        }
    }
    Ok(Example {
        id,
        lp,
        src,
        hyp: mt,
        reference,
        score,
    })
}

fn parse_tsv(path: &Path, text: &str) -> Result<Vec<Example>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| malformed(path, 1, None, "missing header line"))?;
    if header != TSV_HEADER {
        return Err(malformed(
            path,
            1,
            None,
            format!("bad header: expected '{}'", TSV_HEADER.replace('\t', "\\t")),
        ));
    }

    let mut examples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(malformed(
                path,
                line_no,
                None,
                format!("expected 6 columns, found {} (tabs inside fields are not supported)", cols.len()),
            ));
        }
        let score = if cols[5].is_empty() {
            None
        } else {
            Some(cols[5].parse::<f64>().map_err(|_| {
                malformed(path, line_no, Some("score"), format!("'{}' is not a number", cols[5]))
            })?)
        };
        let reference = if cols[4].is_empty() {
            None
        } else {
            Some(cols[4].to_string())
        };
        examples.push(parse_record_fields(
            path,
            line_no,
            cols[0].to_string(),
            cols[1].to_string(),
            cols[2].to_string(),
            cols[3].to_string(),
            reference,
            score,
        )?);
    }
    Ok(examples)
}

fn parse_jsonl(path: &Path, text: &str) -> Result<Vec<Example>> {
    let mut examples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(line)
            .map_err(|e| malformed(path, line_no, None, e.to_string()))?;
        if let Some(q) = rec.score {
            if !q.is_finite() {
                return Err(malformed(path, line_no, Some("score"), "score is not finite"));
            }
        }
        examples.push(parse_record_fields(
            path, line_no, rec.id, rec.lp, rec.src, rec.mt, rec.r#ref, rec.score,
        )?);
    }
    Ok(examples)
}

/// Writes a dataset. Saving and reloading reproduces the dataset
/// field-for-field (provenance is declared by the loader, not stored).
pub fn save_dataset(dataset: &Dataset, path: &Path, format: FileFormat) -> Result<()> {
    let text = match format {
        FileFormat::Tsv => render_tsv(dataset)?,
        FileFormat::Jsonl => render_jsonl(dataset)?,
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_tsv_field(id: &str, name: &str, value: &str) -> Result<()> {
    if value.contains('\t') || value.contains('\n') || value.contains('\r') {
        return Err(Error::Data(format!(
            "example '{id}': field '{name}' contains a tab or line break and cannot be written as TSV"
        )));
    }
    Ok(())
}

fn render_tsv(dataset: &Dataset) -> Result<String> {
    let mut out = String::from(TSV_HEADER);
    out.push('\n');
    for ex in &dataset.examples {
        let reference = ex.reference.as_deref().unwrap_or("");
        check_tsv_field(&ex.id, "id", &ex.id)?;
        check_tsv_field(&ex.id, "src", &ex.src)?;
        check_tsv_field(&ex.id, "mt", &ex.hyp)?;
        check_tsv_field(&ex.id, "ref", reference)?;
        let score = match ex.score {
            Some(q) if q.is_finite() => q.to_string(),
            Some(_) => {
                return Err(Error::Data(format!(
                    "example '{}' has a non-finite score",
                    ex.id
                )))
            }
            None => String::new(),
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            ex.id, ex.lp, ex.src, ex.hyp, reference, score
        ));
    }
    Ok(out)
}

fn render_jsonl(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    for ex in &dataset.examples {
        if let Some(q) = ex.score {
            if !q.is_finite() {
                return Err(Error::Data(format!(
                    "example '{}' has a non-finite score",
                    ex.id
                )));
            }
        }
        let rec = JsonRecord {
            id: ex.id.clone(),
            lp: ex.lp.to_string(),
            src: ex.src.clone(),
            mt: ex.hyp.clone(),
            r#ref: ex.reference.clone(),
            score: ex.score,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serialization cannot fail"));
        out.push('\n');
    }
    Ok(out)
}
