//! Upstream records to [`AlignmentExample`]s.
//!
//! Each converter returns a [`Rejection`] instead of dropping a record it
//! cannot map, so corpus builds can account for every input row.

use serde::Deserialize;

use super::example::{AlignmentExample, BinLabel, Label, Split, Task, ThreeWayLabel};

/// Why a record was not converted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub reason: String,
}

impl Rejection {
    pub fn new(reason: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
        }
    }
}

/// Where an example came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub task: Task,
    pub dataset: String,
    pub split: Split,
}

/// An NLI or fact-verification item.
#[derive(Debug, Clone, Deserialize)]
pub struct ThreeWaySource {
    #[serde(alias = "evidence", alias = "context")]
    pub premise: String,
    #[serde(alias = "claim")]
    pub hypothesis: String,
    pub label: String,
}

pub fn map_three_way_label(label: &str) -> Option<ThreeWayLabel> {
    match label.trim().to_lowercase().as_str() {
        "entailment" | "entailed" | "supports" | "supported" => Some(ThreeWayLabel::Aligned),
        "contradiction" | "contradict" | "refutes" | "refuted" => Some(ThreeWayLabel::Contradict),
        "neutral" | "not enough info" | "not_enough_info" | "nei" => Some(ThreeWayLabel::Neutral),
        _ => None,
    }
}

pub fn convert_three_way(
    record: &ThreeWaySource,
    origin: &Provenance,
) -> Result<AlignmentExample, Rejection> {
    let label = map_three_way_label(&record.label)
        .ok_or_else(|| Rejection::new(format!("unknown label {:?}", record.label)))?;
    finish(
        &record.premise,
        &record.hypothesis,
        Label::ThreeWay(label),
        origin,
    )
}

/// Why a QA-derived claim was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    /// Claim built from the ground-truth answer.
    Correct,
    /// Claim built from a distractor option.
    WrongOption,
    /// Claim built from a generated answer to an unanswerable question.
    Unanswerable,
}

/// Binary-scheme source records after any claim construction.
#[derive(Debug, Clone, PartialEq)]
pub enum BinarySource {
    Paraphrase {
        text_a: String,
        text_b: String,
        is_paraphrase: bool,
    },
    DocNli {
        premise: String,
        hypothesis: String,
        entailed: bool,
    },
    Qa {
        context: String,
        claim: Option<String>,
        kind: AnswerKind,
    },
    Ir {
        passage: String,
        claim: Option<String>,
        relevant: bool,
    },
    Summarization {
        document: String,
        summary: String,
        consistent: bool,
    },
}

pub fn convert_binary(
    record: &BinarySource,
    origin: &Provenance,
) -> Result<AlignmentExample, Rejection> {
    let bin = |aligned: bool| {
        Label::Bin(if aligned {
            BinLabel::Aligned
        } else {
            BinLabel::NotAligned
        })
    };
    let missing_claim = || Rejection::new("missing claim text");
    match record {
        BinarySource::Paraphrase {
            text_a,
            text_b,
            is_paraphrase,
        } => finish(text_a, text_b, bin(*is_paraphrase), origin),
        BinarySource::DocNli {
            premise,
            hypothesis,
            entailed,
        } => finish(premise, hypothesis, bin(*entailed), origin),
        BinarySource::Qa {
            context,
            claim,
            kind,
        } => {
            let claim = claim.as_deref().ok_or_else(missing_claim)?;
            finish(context, claim, bin(*kind == AnswerKind::Correct), origin)
        }
        BinarySource::Ir {
            passage,
            claim,
            relevant,
        } => {
            let claim = claim.as_deref().ok_or_else(missing_claim)?;
            finish(passage, claim, bin(*relevant), origin)
        }
        BinarySource::Summarization {
            document,
            summary,
            consistent,
        } => finish(document, summary, bin(*consistent), origin),
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct StsSource {
    #[serde(alias = "sentence1")]
    pub text_a: String,
    #[serde(alias = "sentence2")]
    pub text_b: String,
    pub score: f64,
}

/// Linearly maps an STS score from `[scale_min, scale_max]` onto `[0, 1]`.
pub fn convert_regression(
    record: &StsSource,
    scale_min: f64,
    scale_max: f64,
    origin: &Provenance,
) -> Result<AlignmentExample, Rejection> {
    if scale_max.partial_cmp(&scale_min) != Some(std::cmp::Ordering::Greater) {
        return Err(Rejection::new(format!(
            "invalid scale [{scale_min}, {scale_max}]"
        )));
    }
    if !(scale_min..=scale_max).contains(&record.score) {
        return Err(Rejection::new(format!(
            "score {} outside scale [{scale_min}, {scale_max}]",
            record.score
        )));
    }
    let value = (record.score - scale_min) / (scale_max - scale_min);
    finish(&record.text_a, &record.text_b, Label::Reg(value), origin)
}

fn finish(
    text_a: &str,
    text_b: &str,
    label: Label,
    origin: &Provenance,
) -> Result<AlignmentExample, Rejection> {
    let example = AlignmentExample {
        text_a: text_a.trim().to_string(),
        text_b: text_b.trim().to_string(),
        label,
        task: origin.task,
        dataset: origin.dataset.clone(),
        split: origin.split,
    };
    example.validate().map_err(Rejection::new)?;
    Ok(example)
}
