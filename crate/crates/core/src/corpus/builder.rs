//! Corpus builds: read every source declared in a manifest, convert, cap,
//! and write one unified JSONL file plus an accounting report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::convert::{
    convert_binary, convert_regression, convert_three_way, AnswerKind, BinarySource, Provenance,
    Rejection, StsSource, ThreeWaySource,
};
use super::declarative::{DeclarativeConverter, TemplateConverter};
use super::example::{AlignmentExample, Split, Task};
use super::synth::{
    derive_seed, mask_tokens, FrequencyExtractor, Infiller, MaskRetention, Paraphraser, Summarizer,
    SynonymParaphraser, DEFAULT_MASK_RATIO,
};

pub const DEFAULT_PER_DATASET_CAP: usize = 500_000;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("invalid build config: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Record layout of a source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    /// `{"premise", "hypothesis", "label"}` with NLI labels.
    Nli,
    /// `{"evidence", "claim", "label"}` with SUPPORTS/REFUTES/NEI labels.
    Fever,
    /// `{"text_a", "text_b", "label": 0|1}`.
    Paraphrase,
    /// `{"premise", "hypothesis", "label": "entailment"|"not_entailment"}`.
    DocNli,
    /// `{"context", "question"?, "answer"?, "claim"?, "kind"}`.
    Qa,
    /// `{"passage", "query"?, "answer"?, "claim"?, "relevant": bool}`.
    Ir,
    /// `{"document", "summary", "label": 0|1}`.
    Summarization,
    /// `{"text_a", "text_b", "score"}` on the manifest's declared scale.
    Sts,
    /// `{"text"}`; expanded into a paraphrase positive and a masked negative.
    WikiText,
    /// `{"document", "summary"}`; expanded into gold and extractive positives
    /// plus masked negatives of each.
    WikiHow,
}

/// One entry of a build manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceManifest {
    pub dataset: String,
    pub task: Task,
    pub format: SourceFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_max: Option<f64>,
    pub path: PathBuf,
}

/// Reads a manifest (JSON array or JSONL); relative paths resolve against
/// the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<SourceManifest>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: String| CorpusError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    let mut entries: Vec<SourceManifest> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| bad(format!("line {}: {e}", i + 1))))
            .collect::<Result<_, _>>()?
    };
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut seen = BTreeSet::new();
    for entry in &mut entries {
        if !seen.insert(entry.dataset.clone()) {
            return Err(bad(format!("duplicate dataset {:?}", entry.dataset)));
        }
        if entry.format == SourceFormat::Sts
            && (entry.scale_min.is_none() || entry.scale_max.is_none())
        {
            return Err(bad(format!(
                "dataset {:?} uses the sts format but lacks scale_min/scale_max",
                entry.dataset
            )));
        }
        if entry.path.is_relative() {
            entry.path = base.join(&entry.path);
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone)]
pub struct CorpusBuildConfig {
    pub included_tasks: BTreeSet<Task>,
    pub per_dataset_cap: usize,
    pub seed: u64,
    pub output: PathBuf,
}

impl CorpusBuildConfig {
    pub fn new(output: impl Into<PathBuf>) -> Self {
        Self {
            included_tasks: Task::ALL.into_iter().collect(),
            per_dataset_cap: DEFAULT_PER_DATASET_CAP,
            seed: 0,
            output: output.into(),
        }
    }

    /// Drops `task` from the build (task-exclusion ablations).
    pub fn excluding(mut self, task: Task) -> Self {
        self.included_tasks.remove(&task);
        self
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.per_dataset_cap == 0 {
            return Err(CorpusError::Config("per-dataset cap must be >= 1".into()));
        }
        if self.included_tasks.is_empty() {
            return Err(CorpusError::Config("no tasks included".into()));
        }
        Ok(())
    }
}

/// The replaceable model components of a build.
pub struct Pipeline {
    pub converter: Box<dyn DeclarativeConverter>,
    pub paraphraser: Box<dyn Paraphraser>,
    pub infiller: Box<dyn Infiller>,
    pub summarizer: Box<dyn Summarizer>,
    pub mask_ratio: f64,
}

impl Default for Pipeline {
    fn default() -> Self {
        Self {
            converter: Box::new(TemplateConverter),
            paraphraser: Box::new(SynonymParaphraser::default()),
            infiller: Box::new(MaskRetention),
            summarizer: Box::new(FrequencyExtractor::default()),
            mask_ratio: DEFAULT_MASK_RATIO,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRow {
    pub line: usize,
    pub reason: String,
}

/// Accounting for one source. `accepted_rows + rejected_rows == input_rows`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub task: Task,
    pub format: SourceFormat,
    pub input_rows: usize,
    pub accepted_rows: usize,
    pub rejected_rows: usize,
    /// Examples produced by accepted rows (synthetic sources yield several).
    pub generated_examples: usize,
    pub written: usize,
    pub dropped_by_cap: usize,
    pub rejection_reasons: BTreeMap<String, usize>,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildReport {
    pub seed: u64,
    pub per_dataset_cap: usize,
    /// The cap counts examples after synthetic augmentation.
    pub cap_counts_augmented_examples: bool,
    pub included_tasks: Vec<Task>,
    pub skipped_datasets: Vec<String>,
    pub datasets: Vec<DatasetReport>,
    pub total_written: usize,
}

/// Converts every included source, returning examples grouped per dataset
/// in manifest order.
pub fn convert_sources(
    config: &CorpusBuildConfig,
    sources: &[SourceManifest],
    pipeline: &Pipeline,
) -> Result<(BuildReport, Vec<Vec<AlignmentExample>>), CorpusError> {
    config.validate()?;
    let (included, skipped): (Vec<&SourceManifest>, Vec<&SourceManifest>) = sources
        .iter()
        .partition(|s| config.included_tasks.contains(&s.task));

    let converted: Vec<(DatasetReport, Vec<AlignmentExample>)> = included
        .par_iter()
        .map(|source| convert_one(source, config, pipeline))
        .collect::<Result<_, _>>()?;

    let (datasets, examples): (Vec<_>, Vec<_>) = converted.into_iter().unzip();
    let report = BuildReport {
        seed: config.seed,
        per_dataset_cap: config.per_dataset_cap,
        cap_counts_augmented_examples: true,
        included_tasks: config.included_tasks.iter().copied().collect(),
        skipped_datasets: skipped.iter().map(|s| s.dataset.clone()).collect(),
        total_written: datasets.iter().map(|d: &DatasetReport| d.written).sum(),
        datasets,
    };
    Ok((report, examples))
}

/// Converts and writes the corpus to `config.output`.
pub fn build_corpus(
    config: &CorpusBuildConfig,
    sources: &[SourceManifest],
    pipeline: &Pipeline,
) -> Result<BuildReport, CorpusError> {
    let (report, examples) = convert_sources(config, sources, pipeline)?;
    let path = &config.output;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for example in examples.iter().flatten() {
        writeln!(out, "{}", example.to_json_line()).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;
    Ok(report)
}

fn convert_one(
    source: &SourceManifest,
    config: &CorpusBuildConfig,
    pipeline: &Pipeline,
) -> Result<(DatasetReport, Vec<AlignmentExample>), CorpusError> {
    let text = fs::read_to_string(&source.path).map_err(io_err(&source.path))?;
    let mut report = DatasetReport {
        dataset: source.dataset.clone(),
        task: source.task,
        format: source.format,
        input_rows: 0,
        accepted_rows: 0,
        rejected_rows: 0,
        generated_examples: 0,
        written: 0,
        dropped_by_cap: 0,
        rejection_reasons: BTreeMap::new(),
        rejected: Vec::new(),
    };
    let mut examples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        report.input_rows += 1;
        let row_seed = derive_seed(config.seed, &source.dataset, i as u64);
        match convert_line(line, source, pipeline, row_seed) {
            Ok(produced) => {
                report.accepted_rows += 1;
                report.generated_examples += produced.len();
                examples.extend(produced);
            }
            Err(rejection) => {
                log::warn!(
                    "{}:{}: rejected: {}",
                    source.path.display(),
                    i + 1,
                    rejection.reason
                );
                report.rejected_rows += 1;
                *report
                    .rejection_reasons
                    .entry(reason_category(&rejection.reason))
                    .or_default() += 1;
                report.rejected.push(RejectedRow {
                    line: i + 1,
                    reason: rejection.reason,
                });
            }
        }
    }
    // First N in source order; no shuffling happens before the cap.
    if examples.len() > config.per_dataset_cap {
        report.dropped_by_cap = examples.len() - config.per_dataset_cap;
        examples.truncate(config.per_dataset_cap);
    }
    report.written = examples.len();
    Ok((report, examples))
}

/// Groups rejection reasons by their leading clause.
fn reason_category(reason: &str) -> String {
    reason
        .split(':')
        .next()
        .unwrap_or(reason)
        .trim()
        .to_string()
}

#[derive(Deserialize)]
struct ParaphraseRow {
    #[serde(alias = "question1", alias = "sentence1")]
    text_a: String,
    #[serde(alias = "question2", alias = "sentence2")]
    text_b: String,
    #[serde(alias = "is_duplicate")]
    label: Value,
}

#[derive(Deserialize)]
struct DocNliRow {
    premise: String,
    hypothesis: String,
    label: String,
}

#[derive(Deserialize)]
struct QaRow {
    context: String,
    question: Option<String>,
    answer: Option<String>,
    claim: Option<String>,
    kind: AnswerKind,
}

#[derive(Deserialize)]
struct IrRow {
    passage: String,
    query: Option<String>,
    answer: Option<String>,
    claim: Option<String>,
    relevant: bool,
}

#[derive(Deserialize)]
struct SummarizationRow {
    document: String,
    summary: String,
    label: Value,
}

#[derive(Deserialize)]
struct WikiTextRow {
    text: String,
}

#[derive(Deserialize)]
struct WikiHowRow {
    document: String,
    summary: String,
}

fn parse<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, Rejection> {
    serde_json::from_value(value).map_err(|e| Rejection::new(format!("malformed record: {e}")))
}

fn binary_flag(value: &Value) -> Result<bool, Rejection> {
    match value {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
        other => Err(Rejection::new(format!("unknown label {other}"))),
    }
}

fn convert_line(
    line: &str,
    source: &SourceManifest,
    pipeline: &Pipeline,
    row_seed: u64,
) -> Result<Vec<AlignmentExample>, Rejection> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| Rejection::new(format!("malformed line: {e}")))?;
    let split = match value.get("split") {
        None => Split::Train,
        Some(Value::String(s)) => s.parse().map_err(Rejection::new)?,
        Some(other) => return Err(Rejection::new(format!("unknown split {other}"))),
    };
    let origin = Provenance {
        task: source.task,
        dataset: source.dataset.clone(),
        split,
    };
    let one = |ex: AlignmentExample| vec![ex];
    match source.format {
        SourceFormat::Nli | SourceFormat::Fever => {
            let row: ThreeWaySource = parse(value)?;
            convert_three_way(&row, &origin).map(one)
        }
        SourceFormat::Paraphrase => {
            let row: ParaphraseRow = parse(value)?;
            let record = BinarySource::Paraphrase {
                is_paraphrase: binary_flag(&row.label)?,
                text_a: row.text_a,
                text_b: row.text_b,
            };
            convert_binary(&record, &origin).map(one)
        }
        SourceFormat::DocNli => {
            let row: DocNliRow = parse(value)?;
            let entailed = match row.label.trim().to_lowercase().as_str() {
                "entailment" | "entailed" => true,
                "not_entailment" | "not_entailed" => false,
                other => return Err(Rejection::new(format!("unknown label {other:?}"))),
            };
            let record = BinarySource::DocNli {
                premise: row.premise,
                hypothesis: row.hypothesis,
                entailed,
            };
            convert_binary(&record, &origin).map(one)
        }
        SourceFormat::Qa => {
            let row: QaRow = parse(value)?;
            let claim = resolve_claim(row.claim, row.question, row.answer, pipeline)?;
            let record = BinarySource::Qa {
                context: row.context,
                claim,
                kind: row.kind,
            };
            convert_binary(&record, &origin).map(one)
        }
        SourceFormat::Ir => {
            let row: IrRow = parse(value)?;
            let claim = resolve_claim(row.claim, row.query, row.answer, pipeline)?;
            let record = BinarySource::Ir {
                passage: row.passage,
                claim,
                relevant: row.relevant,
            };
            convert_binary(&record, &origin).map(one)
        }
        SourceFormat::Summarization => {
            let row: SummarizationRow = parse(value)?;
            let record = BinarySource::Summarization {
                consistent: binary_flag(&row.label)?,
                document: row.document,
                summary: row.summary,
            };
            convert_binary(&record, &origin).map(one)
        }
        SourceFormat::Sts => {
            let row: StsSource = parse(value)?;
            let (lo, hi) = (
                source.scale_min.unwrap_or(f64::NAN),
                source.scale_max.unwrap_or(f64::NAN),
            );
            convert_regression(&row, lo, hi, &origin).map(one)
        }
        SourceFormat::WikiText => {
            let row: WikiTextRow = parse(value)?;
            let paraphrase = pipeline.paraphraser.paraphrase(&row.text);
            let mut out = vec![binary_pair(&row.text, &paraphrase, true, &origin)?];
            out.push(masked_negative(
                &row.text,
                &paraphrase,
                pipeline,
                row_seed,
                &origin,
            )?);
            Ok(out)
        }
        SourceFormat::WikiHow => {
            let row: WikiHowRow = parse(value)?;
            let extract = pipeline
                .summarizer
                .summarize(&row.document)
                .ok_or_else(|| Rejection::new("extractive summarizer produced no summary"))?;
            let mut out = Vec::with_capacity(4);
            for (k, positive) in [row.summary.as_str(), extract.as_str()]
                .into_iter()
                .enumerate()
            {
                out.push(binary_pair(&row.document, positive, true, &origin)?);
                out.push(masked_negative(
                    &row.document,
                    positive,
                    pipeline,
                    row_seed.wrapping_add(k as u64),
                    &origin,
                )?);
            }
            Ok(out)
        }
    }
}

fn resolve_claim(
    claim: Option<String>,
    question: Option<String>,
    answer: Option<String>,
    pipeline: &Pipeline,
) -> Result<Option<String>, Rejection> {
    match (claim, question, answer) {
        (Some(claim), _, _) => Ok(Some(claim)),
        (None, Some(q), Some(a)) => pipeline
            .converter
            .convert(&q, &a)
            .map(Some)
            .map_err(|e| Rejection::new(format!("declarative conversion failed: {e}"))),
        _ => Ok(None),
    }
}

fn binary_pair(
    a: &str,
    b: &str,
    aligned: bool,
    origin: &Provenance,
) -> Result<AlignmentExample, Rejection> {
    convert_binary(
        &BinarySource::Paraphrase {
            text_a: a.to_string(),
            text_b: b.to_string(),
            is_paraphrase: aligned,
        },
        origin,
    )
}

fn masked_negative(
    a: &str,
    positive: &str,
    pipeline: &Pipeline,
    seed: u64,
    origin: &Provenance,
) -> Result<AlignmentExample, Rejection> {
    let masked = mask_tokens(positive, pipeline.mask_ratio, seed)
        .map_err(|e| Rejection::new(format!("masking failed: {e}")))?;
    let corrupted = pipeline.infiller.infill(&masked);
    binary_pair(a, &corrupted, false, origin)
}
