//! Benchmark protocols and report assembly.
//!
//! * `summac`: tune a threshold on each dataset's validation split, report
//!   balanced accuracy and ROC AUC on its test split.
//! * `true`: ROC AUC per dataset, averaged with and without the datasets the
//!   alignment model was trained on.
//! * `correlation`: Pearson, Spearman and Kendall tau-b against human scores.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::clean::clean_claim;
use super::polytope::polytope_label;
use super::stats::{
    auc_roc, balanced_accuracy, kendall, pearson, spearman, tune_threshold, StatsError,
};
use crate::metric::{align_score, MetricConfig};
use crate::scorer::AlignmentScorer;

/// Largest tolerated share of records per dataset that fail to score.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Dataset tags (normalized) excluded from the zero-shot average.
pub const SEEN_IN_TRAINING: [&str; 3] = ["paws", "vitaminc", "fever"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("no records to evaluate")]
    Empty,
    #[error("dataset {dataset}: {kind} benchmark requires a {split} split")]
    MissingSplit {
        dataset: String,
        kind: BenchmarkKind,
        split: &'static str,
    },
    #[error("dataset {dataset}: {kind} benchmark requires {expected} targets")]
    TargetMismatch {
        dataset: String,
        kind: BenchmarkKind,
        expected: &'static str,
    },
    #[error("dataset {dataset}: {failed} of {total} records failed to score (limit {limit:.0}%)")]
    QualityGate {
        dataset: String,
        failed: usize,
        total: usize,
        limit: f64,
    },
    #[error("dataset {dataset}: {source}")]
    Stats {
        dataset: String,
        #[source]
        source: StatsError,
    },
    #[error("invalid worker count {0}")]
    Workers(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkKind {
    Summac,
    True,
    Correlation,
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkKind::Summac => "summac",
            BenchmarkKind::True => "true",
            BenchmarkKind::Correlation => "correlation",
        })
    }
}

impl FromStr for BenchmarkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "summac" => Ok(BenchmarkKind::Summac),
            "true" => Ok(BenchmarkKind::True),
            "correlation" => Ok(BenchmarkKind::Correlation),
            other => Err(format!("unknown benchmark kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalSplit {
    Val,
    Test,
}

/// Gold annotation of a record. Binary labels use `true` for consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Binary(bool),
    Human(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub context: String,
    pub claim: String,
    pub target: Target,
    pub dataset: String,
    pub split: EvalSplit,
}

#[derive(Deserialize)]
struct RawEvalRecord {
    context: String,
    claim: String,
    label: Option<u8>,
    human_score: Option<f64>,
    error_types: Option<Vec<String>>,
    dataset: String,
    split: EvalSplit,
}

impl EvalRecord {
    /// Parses one JSONL line. PolyTope-style records may give `error_types`
    /// instead of `label`.
    pub fn from_json_line(line: &str) -> Result<Self, String> {
        let raw: RawEvalRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let target = match (raw.label, raw.human_score, raw.error_types) {
            (Some(0), None, None) => Target::Binary(false),
            (Some(1), None, None) => Target::Binary(true),
            (Some(other), None, None) => return Err(format!("label must be 0 or 1, got {other}")),
            (None, Some(score), None) if score.is_finite() => Target::Human(score),
            (None, None, Some(tags)) => {
                Target::Binary(polytope_label(&tags).map_err(|e| e.to_string())?)
            }
            _ => {
                return Err(
                    "exactly one of label, human_score or error_types must be present".into(),
                )
            }
        };
        Ok(Self {
            context: raw.context,
            claim: raw.claim,
            target,
            dataset: raw.dataset,
            split: raw.split,
        })
    }
}

#[derive(Debug, Deserialize)]
struct BenchManifestEntry {
    dataset: String,
    path: PathBuf,
}

/// Loads every dataset listed in `<dir>/manifest.json`
/// (`[{"dataset": str, "path": str}, ...]`).
pub fn load_benchmark_dir(dir: &Path) -> Result<Vec<EvalRecord>, BenchError> {
    let manifest_path = dir.join("manifest.json");
    let input_err = |path: &Path, message: String| BenchError::Input {
        path: path.to_path_buf(),
        message,
    };
    let text =
        fs::read_to_string(&manifest_path).map_err(|e| input_err(&manifest_path, e.to_string()))?;
    let entries: Vec<BenchManifestEntry> =
        serde_json::from_str(&text).map_err(|e| input_err(&manifest_path, e.to_string()))?;
    let mut records = Vec::new();
    for entry in entries {
        let path = dir.join(&entry.path);
        let body = fs::read_to_string(&path).map_err(|e| input_err(&path, e.to_string()))?;
        for (i, line) in body.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record = EvalRecord::from_json_line(line)
                .map_err(|e| input_err(&path, format!("line {}: {e}", i + 1)))?;
            if record.dataset != entry.dataset {
                return Err(input_err(
                    &path,
                    format!(
                        "line {}: dataset {:?} does not match manifest entry {:?}",
                        i + 1,
                        record.dataset,
                        entry.dataset
                    ),
                ));
            }
            records.push(record);
        }
    }
    Ok(records)
}

/// Values reported for one dataset; fields not produced by the benchmark
/// kind are omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc_roc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balanced_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pearson: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spearman: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetResult {
    pub dataset: String,
    pub records: usize,
    pub scored: usize,
    pub failed: usize,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub scorer: String,
    pub head: String,
    pub mode: String,
    pub chunk_budget: usize,
    pub token_inflation: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub decision_rule: &'static str,
    pub positive_label: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summac_auc_split: Option<&'static str>,
    pub claims_cleaned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Averages {
    #[serde(rename = "AVG")]
    pub avg: Metrics,
    #[serde(rename = "AVG-ZS", skip_serializing_if = "Option::is_none")]
    pub avg_zero_shot: Option<Metrics>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub zero_shot_datasets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub kind: BenchmarkKind,
    pub metadata: RunMetadata,
    pub datasets: Vec<DatasetResult>,
    pub averages: Averages,
}

/// Run-level options that do not affect the scores themselves.
#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub workers: usize,
    pub seed: u64,
    pub timestamp: Option<String>,
}

pub fn is_zero_shot(dataset: &str) -> bool {
    let key: String = dataset
        .chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    !SEEN_IN_TRAINING.contains(&key.as_str())
}

/// Cleans, scores and summarizes `records` under the given protocol.
/// Output is independent of the worker count.
pub fn run_benchmark(
    records: &[EvalRecord],
    kind: BenchmarkKind,
    scorer: &dyn AlignmentScorer,
    config: &MetricConfig,
    options: &BenchOptions,
) -> Result<BenchmarkReport, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut groups: BTreeMap<&str, Vec<&EvalRecord>> = BTreeMap::new();
    for record in records {
        groups
            .entry(record.dataset.as_str())
            .or_default()
            .push(record);
    }
    for (dataset, group) in &groups {
        check_group(dataset, group, kind)?;
    }

    let workers = options.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|_| BenchError::Workers(workers))?;
    let scores: Vec<Result<f64, String>> = pool.install(|| {
        records
            .par_iter()
            .map(|r| {
                let claim = clean_claim(&r.claim, &r.context);
                align_score(&r.context, &claim, scorer, config).map_err(|e| e.to_string())
            })
            .collect()
    });

    let mut by_dataset: BTreeMap<&str, Vec<(&EvalRecord, f64)>> = BTreeMap::new();
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    for (record, score) in records.iter().zip(&scores) {
        match score {
            Ok(s) => by_dataset
                .entry(&record.dataset)
                .or_default()
                .push((record, *s)),
            Err(e) => {
                log::warn!("{}: scoring failed: {e}", record.dataset);
                *failures.entry(&record.dataset).or_default() += 1;
            }
        }
    }

    let mut datasets = Vec::with_capacity(groups.len());
    for (dataset, group) in &groups {
        let failed = failures.get(dataset).copied().unwrap_or(0);
        if failed as f64 > MAX_FAILURE_RATE * group.len() as f64 {
            return Err(BenchError::QualityGate {
                dataset: dataset.to_string(),
                failed,
                total: group.len(),
                limit: MAX_FAILURE_RATE * 100.0,
            });
        }
        let scored = by_dataset.remove(dataset).unwrap_or_default();
        let metrics = dataset_metrics(kind, &scored).map_err(|source| BenchError::Stats {
            dataset: dataset.to_string(),
            source,
        })?;
        datasets.push(DatasetResult {
            dataset: dataset.to_string(),
            records: group.len(),
            scored: scored.len(),
            failed,
            metrics,
        });
    }

    let averages = averages(kind, &datasets);
    Ok(BenchmarkReport {
        kind,
        metadata: RunMetadata {
            scorer: scorer.describe(),
            head: config.head.to_string(),
            mode: config.mode.to_string(),
            chunk_budget: config.chunk_budget,
            token_inflation: config.counter.inflation(),
            seed: options.seed,
            timestamp: options.timestamp.clone(),
            decision_rule: "score > threshold",
            positive_label: "consistent",
            summac_auc_split: (kind == BenchmarkKind::Summac).then_some("test"),
            claims_cleaned: true,
        },
        datasets,
        averages,
    })
}

fn check_group(
    dataset: &str,
    group: &[&EvalRecord],
    kind: BenchmarkKind,
) -> Result<(), BenchError> {
    let (expected, ok): (&'static str, fn(&Target) -> bool) = match kind {
        BenchmarkKind::Correlation => ("human-score", |t| matches!(t, Target::Human(_))),
        _ => ("binary-label", |t| matches!(t, Target::Binary(_))),
    };
    if !group.iter().all(|r| ok(&r.target)) {
        return Err(BenchError::TargetMismatch {
            dataset: dataset.to_string(),
            kind,
            expected,
        });
    }
    if kind == BenchmarkKind::Summac {
        for (split, name) in [(EvalSplit::Val, "val"), (EvalSplit::Test, "test")] {
            if !group.iter().any(|r| r.split == split) {
                return Err(BenchError::MissingSplit {
                    dataset: dataset.to_string(),
                    kind,
                    split: name,
                });
            }
        }
    }
    Ok(())
}

fn binary(target: &Target) -> bool {
    matches!(target, Target::Binary(true))
}

fn human(target: &Target) -> f64 {
    match target {
        Target::Human(v) => *v,
        Target::Binary(b) => f64::from(u8::from(*b)),
    }
}

fn dataset_metrics(
    kind: BenchmarkKind,
    scored: &[(&EvalRecord, f64)],
) -> Result<Metrics, StatsError> {
    let mut m = Metrics::default();
    match kind {
        BenchmarkKind::Summac => {
            let part = |split: EvalSplit| -> (Vec<f64>, Vec<bool>) {
                scored
                    .iter()
                    .filter(|(r, _)| r.split == split)
                    .map(|(r, s)| (*s, binary(&r.target)))
                    .unzip()
            };
            let (val_scores, val_labels) = part(EvalSplit::Val);
            let (test_scores, test_labels) = part(EvalSplit::Test);
            let tuned = tune_threshold(&val_scores, &val_labels)?;
            let predictions: Vec<bool> = test_scores.iter().map(|s| *s > tuned.threshold).collect();
            m.threshold = Some(tuned.threshold);
            m.balanced_accuracy = Some(balanced_accuracy(&predictions, &test_labels)?);
            m.auc_roc = Some(auc_roc(&test_scores, &test_labels)?);
        }
        BenchmarkKind::True => {
            let (scores, labels): (Vec<f64>, Vec<bool>) =
                scored.iter().map(|(r, s)| (*s, binary(&r.target))).unzip();
            m.auc_roc = Some(auc_roc(&scores, &labels)?);
        }
        BenchmarkKind::Correlation => {
            let (scores, gold): (Vec<f64>, Vec<f64>) =
                scored.iter().map(|(r, s)| (*s, human(&r.target))).unzip();
            m.pearson = Some(pearson(&scores, &gold)?);
            m.spearman = Some(spearman(&scores, &gold)?);
            m.kendall = Some(kendall(&scores, &gold)?);
        }
    }
    Ok(m)
}

fn mean_metrics(results: &[&DatasetResult]) -> Metrics {
    let mean = |get: fn(&Metrics) -> Option<f64>| -> Option<f64> {
        let values: Vec<f64> = results.iter().filter_map(|d| get(&d.metrics)).collect();
        if values.is_empty() || values.len() != results.len() {
            return None;
        }
        Some(values.iter().sum::<f64>() / values.len() as f64)
    };
    Metrics {
        auc_roc: mean(|m| m.auc_roc),
        balanced_accuracy: mean(|m| m.balanced_accuracy),
        // Thresholds are per dataset; their mean is meaningless.
        threshold: None,
        pearson: mean(|m| m.pearson),
        spearman: mean(|m| m.spearman),
        kendall: mean(|m| m.kendall),
    }
}

fn averages(kind: BenchmarkKind, datasets: &[DatasetResult]) -> Averages {
    let all: Vec<&DatasetResult> = datasets.iter().collect();
    let (avg_zero_shot, zero_shot_datasets) = if kind == BenchmarkKind::True {
        let zs: Vec<&DatasetResult> = datasets
            .iter()
            .filter(|d| is_zero_shot(&d.dataset))
            .collect();
        let names = zs.iter().map(|d| d.dataset.clone()).collect();
        ((!zs.is_empty()).then(|| mean_metrics(&zs)), names)
    } else {
        (None, Vec::new())
    };
    Averages {
        avg: mean_metrics(&all),
        avg_zero_shot,
        zero_shot_datasets,
    }
}

/// (header, getter, scaled to percent)
type Column = (&'static str, fn(&Metrics) -> Option<f64>, bool);

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    fn columns(&self) -> Vec<Column> {
        match self.kind {
            BenchmarkKind::Summac => vec![
                ("AUC-ROC", |m| m.auc_roc, true),
                ("BAcc", |m| m.balanced_accuracy, true),
                ("Threshold", |m| m.threshold, false),
            ],
            BenchmarkKind::True => vec![("AUC-ROC", |m| m.auc_roc, true)],
            BenchmarkKind::Correlation => vec![
                ("Pearson", |m| m.pearson, true),
                ("Spearman", |m| m.spearman, true),
                ("Kendall", |m| m.kendall, true),
            ],
        }
    }

    /// Aligned-column text table: one row per dataset, then the averages.
    /// Metrics are shown as percentages with one decimal.
    pub fn to_table(&self) -> String {
        let columns = self.columns();
        let fmt_cell = |value: Option<f64>, percent: bool| match value {
            Some(v) if percent => format!("{:.1}", v * 100.0),
            Some(v) => format!("{v:.4}"),
            None => "-".to_string(),
        };
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["Dataset".to_string()];
        header.extend(columns.iter().map(|(h, _, _)| h.to_string()));
        rows.push(header);
        let mut push = |name: &str, m: &Metrics| {
            let mut row = vec![name.to_string()];
            row.extend(columns.iter().map(|(_, get, pct)| fmt_cell(get(m), *pct)));
            rows.push(row);
        };
        for d in &self.datasets {
            push(&d.dataset, &d.metrics);
        }
        push("AVG", &self.averages.avg);
        if let Some(zs) = &self.averages.avg_zero_shot {
            push("AVG-ZS", zs);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (i, row) in rows.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    if c == 0 {
                        format!("{cell:<w$}", w = widths[c])
                    } else {
                        format!("{cell:>w$}", w = widths[c])
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 || i == self.datasets.len() {
                let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(rule));
            }
        }
        out
    }
}
