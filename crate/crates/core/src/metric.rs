//! Chunk-level consistency scoring and its ablation variants.
//!
//! The default score splits the context into ~350-token chunks at sentence
//! boundaries, splits the claim into sentences, scores every
//! (chunk, claim sentence) pair, takes the best chunk for each claim sentence
//! and averages over claim sentences.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::scorer::{AlignmentJudgment, AlignmentScorer, ScorerError};
use crate::segment::{
    chunk_context, split_sentences_with, SegmentError, TokenCounter, DEFAULT_CHUNK_BUDGET,
};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("context is empty")]
    EmptyContext,
    #[error("claim is empty")]
    EmptyClaim,
    #[error("SMART-N is only defined for n = 1, got {0}")]
    UnsupportedSmartN(usize),
    #[error("score matrix must be at least 1x1 with values in [0, 1]: {0}")]
    InvalidMatrix(String),
    #[error(transparent)]
    Segment(#[from] SegmentError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

/// Which output head the score is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum HeadChoice {
    #[default]
    #[serde(rename = "3way")]
    ThreeWayAligned,
    #[serde(rename = "bin")]
    BinaryAligned,
    #[serde(rename = "reg")]
    Regression,
}

impl HeadChoice {
    pub fn extract(self, judgment: &AlignmentJudgment) -> f64 {
        match self {
            HeadChoice::ThreeWayAligned => judgment.aligned_3way(),
            HeadChoice::BinaryAligned => judgment.aligned_bin(),
            HeadChoice::Regression => judgment.reg,
        }
    }
}

impl fmt::Display for HeadChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeadChoice::ThreeWayAligned => "3way",
            HeadChoice::BinaryAligned => "bin",
            HeadChoice::Regression => "reg",
        })
    }
}

impl FromStr for HeadChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "3way" => Ok(HeadChoice::ThreeWayAligned),
            "bin" => Ok(HeadChoice::BinaryAligned),
            "reg" => Ok(HeadChoice::Regression),
            other => Err(format!(
                "unknown head {other:?} (expected 3way, bin or reg)"
            )),
        }
    }
}

/// How context and claim are split before scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    #[default]
    Chunk,
    Doc,
    Sentence,
    SmartL,
    SmartN(usize),
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalMode::Chunk => f.write_str("chunk"),
            EvalMode::Doc => f.write_str("doc"),
            EvalMode::Sentence => f.write_str("sentence"),
            EvalMode::SmartL => f.write_str("smart-l"),
            EvalMode::SmartN(1) => f.write_str("smart-n"),
            EvalMode::SmartN(n) => write!(f, "smart-n:{n}"),
        }
    }
}

impl FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chunk" => Ok(EvalMode::Chunk),
            "doc" => Ok(EvalMode::Doc),
            "sentence" => Ok(EvalMode::Sentence),
            "smart-l" => Ok(EvalMode::SmartL),
            "smart-n" => Ok(EvalMode::SmartN(1)),
            other => match other.strip_prefix("smart-n:") {
                Some(n) => n
                    .parse()
                    .map(EvalMode::SmartN)
                    .map_err(|_| format!("invalid SMART-N size in {other:?}")),
                None => Err(format!(
                    "unknown mode {other:?} (expected chunk, doc, sentence, smart-l or smart-n)"
                )),
            },
        }
    }
}

impl Serialize for EvalMode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Context units (rows) by claim sentences (columns), values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, MetricError> {
        if rows == 0 || cols == 0 {
            return Err(MetricError::InvalidMatrix(format!("shape {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(MetricError::InvalidMatrix(format!(
                "{} values for shape {rows}x{cols}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MetricError::InvalidMatrix(format!("value {v}")));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MetricError::InvalidMatrix("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}

/// Mean over claim sentences of the best-supporting context unit.
pub fn mean_of_max(m: &ScoreMatrix) -> f64 {
    let total: f64 = (0..m.cols)
        .map(|j| {
            (0..m.rows)
                .map(|i| m.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum();
    total / m.cols as f64
}

/// Soft longest-common-subsequence over the matrix, normalized by the
/// number of claim sentences.
pub fn smart_l_aggregate(m: &ScoreMatrix) -> f64 {
    let mut prev = vec![0.0; m.cols + 1];
    let mut cur = vec![0.0; m.cols + 1];
    for i in 1..=m.rows {
        cur[0] = 0.0;
        for j in 1..=m.cols {
            let diag = prev[j - 1] + m.get(i - 1, j - 1);
            cur[j] = prev[j].max(cur[j - 1]).max(diag);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m.cols] / m.cols as f64
}

/// Greedy 1-sentence matching: every claim sentence takes its best context
/// sentence. Other window sizes are rejected.
pub fn smart_n_aggregate(m: &ScoreMatrix, n: usize) -> Result<f64, MetricError> {
    if n != 1 {
        return Err(MetricError::UnsupportedSmartN(n));
    }
    Ok(mean_of_max(m))
}

/// Settings shared by every metric call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub head: HeadChoice,
    pub mode: EvalMode,
    pub chunk_budget: usize,
    pub counter: TokenCounter,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            head: HeadChoice::default(),
            mode: EvalMode::default(),
            chunk_budget: DEFAULT_CHUNK_BUDGET,
            counter: TokenCounter::default(),
        }
    }
}

/// Scores `claim` against `context` under the configured mode and head.
pub fn align_score(
    context: &str,
    claim: &str,
    scorer: &dyn AlignmentScorer,
    config: &MetricConfig,
) -> Result<f64, MetricError> {
    match config.mode {
        EvalMode::Doc => doc_level_score(context, claim, scorer, config.head),
        EvalMode::Sentence => sentence_level_score(context, claim, scorer, config),
        EvalMode::SmartL => {
            let m = sentence_matrix(context, claim, scorer, config)?;
            Ok(smart_l_aggregate(&m))
        }
        EvalMode::SmartN(n) => {
            if n != 1 {
                return Err(MetricError::UnsupportedSmartN(n));
            }
            let m = sentence_matrix(context, claim, scorer, config)?;
            smart_n_aggregate(&m, n)
        }
        EvalMode::Chunk => {
            let m = chunk_matrix(context, claim, scorer, config)?;
            Ok(mean_of_max(&m))
        }
    }
}

/// One judgment on the unsplit pair; any truncation is the backend's business.
pub fn doc_level_score(
    context: &str,
    claim: &str,
    scorer: &dyn AlignmentScorer,
    head: HeadChoice,
) -> Result<f64, MetricError> {
    let context = crate::segment::normalize(context);
    let claim = crate::segment::normalize(claim);
    if context.is_empty() {
        return Err(MetricError::EmptyContext);
    }
    if claim.is_empty() {
        return Err(MetricError::EmptyClaim);
    }
    let judgment = scorer.score_pair(&context, &claim)?;
    Ok(head.extract(&judgment))
}

/// Mean-of-max over individual context sentences instead of chunks.
pub fn sentence_level_score(
    context: &str,
    claim: &str,
    scorer: &dyn AlignmentScorer,
    config: &MetricConfig,
) -> Result<f64, MetricError> {
    let m = sentence_matrix(context, claim, scorer, config)?;
    Ok(mean_of_max(&m))
}

/// Score grid over context chunks x claim sentences.
pub fn chunk_matrix(
    context: &str,
    claim: &str,
    scorer: &dyn AlignmentScorer,
    config: &MetricConfig,
) -> Result<ScoreMatrix, MetricError> {
    let context_seg = split_sentences_with(context, &config.counter);
    if context_seg.is_empty() {
        return Err(MetricError::EmptyContext);
    }
    let units: Vec<String> = chunk_context(&context_seg, config.chunk_budget)?
        .into_iter()
        .map(|c| c.text)
        .collect();
    build_matrix(&units, claim, scorer, config)
}

/// Score grid over context sentences x claim sentences.
pub fn sentence_matrix(
    context: &str,
    claim: &str,
    scorer: &dyn AlignmentScorer,
    config: &MetricConfig,
) -> Result<ScoreMatrix, MetricError> {
    let context_seg = split_sentences_with(context, &config.counter);
    if context_seg.is_empty() {
        return Err(MetricError::EmptyContext);
    }
    build_matrix(context_seg.sentences(), claim, scorer, config)
}

fn build_matrix(
    units: &[String],
    claim: &str,
    scorer: &dyn AlignmentScorer,
    config: &MetricConfig,
) -> Result<ScoreMatrix, MetricError> {
    let claim_seg = split_sentences_with(claim, &config.counter);
    if claim_seg.is_empty() {
        return Err(MetricError::EmptyClaim);
    }
    let claims = claim_seg.sentences();
    let pairs: Vec<(&str, &str)> = units
        .iter()
        .flat_map(|u| claims.iter().map(move |c| (u.as_str(), c.as_str())))
        .collect();
    let judgments = scorer.score_batch(&pairs)?;
    let values = judgments.iter().map(|j| config.head.extract(j)).collect();
    ScoreMatrix::new(units.len(), claims.len(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::FixtureScorer;

    fn judgment(p: f64) -> AlignmentJudgment {
        AlignmentJudgment::new([p, 1.0 - p, 0.0], [p, 1.0 - p], p).unwrap()
    }

    #[test]
    fn single_cell_matrix() {
        let mut s = FixtureScorer::new();
        s.insert("The sky is blue.", "It is blue.", judgment(0.7));
        let score = align_score(
            "The sky is blue.",
            "It is blue.",
            &s,
            &MetricConfig::default(),
        )
        .unwrap();
        assert_eq!(score, 0.7);
    }

    #[test]
    fn two_by_two_mean_of_max() {
        let m = ScoreMatrix::from_rows(&[vec![0.9, 0.2], vec![0.4, 0.6]]).unwrap();
        assert!((mean_of_max(&m) - 0.75).abs() < 1e-12);
        assert!((smart_n_aggregate(&m, 1).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn column_of_two_context_sentences() {
        let m = ScoreMatrix::from_rows(&[vec![0.1], vec![0.8]]).unwrap();
        assert_eq!(mean_of_max(&m), 0.8);
    }

    #[test]
    fn smart_l_cases() {
        let single = ScoreMatrix::from_rows(&[vec![0.3]]).unwrap();
        assert_eq!(smart_l_aggregate(&single), 0.3);
        let diag = ScoreMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(smart_l_aggregate(&diag), 1.0);
        let zero = ScoreMatrix::from_rows(&vec![vec![0.0; 3]; 2]).unwrap();
        assert_eq!(smart_l_aggregate(&zero), 0.0);
        // Anti-diagonal: only one cell can be on a monotone path.
        let anti = ScoreMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(smart_l_aggregate(&anti), 0.5);
    }

    #[test]
    fn smart_n_rejects_other_sizes() {
        let m = ScoreMatrix::from_rows(&[vec![0.5]]).unwrap();
        assert!(matches!(
            smart_n_aggregate(&m, 2),
            Err(MetricError::UnsupportedSmartN(2))
        ));
    }

    #[test]
    fn matrix_validation() {
        assert!(ScoreMatrix::new(0, 1, vec![]).is_err());
        assert!(ScoreMatrix::new(1, 1, vec![1.5]).is_err());
        assert!(ScoreMatrix::from_rows(&[vec![0.1], vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn empty_claim_is_an_error() {
        let s = FixtureScorer::new();
        let cfg = MetricConfig::default();
        assert!(matches!(
            align_score("Context.", "  ", &s, &cfg),
            Err(MetricError::EmptyClaim)
        ));
        assert!(matches!(
            doc_level_score("Context.", "", &s, HeadChoice::default()),
            Err(MetricError::EmptyClaim)
        ));
    }

    #[test]
    fn doc_mode_reads_head_verbatim() {
        let mut s = FixtureScorer::new();
        let j = AlignmentJudgment::new([0.6, 0.3, 0.1], [0.8, 0.2], 0.4).unwrap();
        s.insert("A long context. With two sentences.", "A claim.", j);
        let ctx = "A long context. With two sentences.";
        for (head, want) in [
            (HeadChoice::ThreeWayAligned, 0.6),
            (HeadChoice::BinaryAligned, 0.8),
            (HeadChoice::Regression, 0.4),
        ] {
            assert_eq!(doc_level_score(ctx, "A claim.", &s, head).unwrap(), want);
        }
    }

    #[test]
    fn mode_and_head_parse_round_trip() {
        for mode in [
            EvalMode::Chunk,
            EvalMode::Doc,
            EvalMode::Sentence,
            EvalMode::SmartL,
            EvalMode::SmartN(1),
        ] {
            assert_eq!(mode.to_string().parse::<EvalMode>().unwrap(), mode);
        }
        assert!("bogus".parse::<EvalMode>().is_err());
        assert_eq!(
            "bin".parse::<HeadChoice>().unwrap(),
            HeadChoice::BinaryAligned
        );
    }
}
