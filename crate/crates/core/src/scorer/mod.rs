//! The alignment function: a text pair `(a, b)` mapped to a judgment of how
//! much of `b` is supported by `a`.
//!
//! Backends implement [`AlignmentScorer`]. Three are bundled: a table-driven
//! [`FixtureScorer`] for tests, a deterministic [`LexicalScorer`], and a
//! [`RemoteScorer`] that talks to a neural backend over HTTP.

mod fixture;
mod lexical;
mod remote;

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::{FixtureEntry, FixtureScorer};
pub use lexical::{content_words, lexical_overlap_judgment, LexicalScorer, DEFAULT_SMOOTHING};
pub use remote::{AlignRequest, AlignResponse, RemoteConfig, RemoteScorer, WirePair};

use crate::segment::normalize;

/// Tolerance on probability-vector sums.
pub const PROB_TOLERANCE: f64 = 1e-6;

pub const ALIGNED: usize = 0;
pub const CONTRADICT: usize = 1;
pub const NEUTRAL: usize = 2;
pub const NOT_ALIGNED: usize = 1;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("pair {index}: {side} text is empty after normalization")]
    EmptyInput { index: usize, side: &'static str },
    #[error("pair {index}: no fixture entry for this text pair")]
    UnknownPair { index: usize },
    #[error("pair {index}: invalid judgment: {reason}")]
    InvalidJudgment { index: usize, reason: String },
    #[error("pair {index}: transport error: {message}")]
    Transport { index: usize, message: String },
    #[error("pair {index}: request timed out")]
    Timeout { index: usize },
    #[error("pair {index}: protocol error: {message}")]
    Protocol { index: usize, message: String },
    #[error("fixture table {path}: {message}")]
    Fixture { path: PathBuf, message: String },
    #[error("invalid scorer configuration: {0}")]
    Config(String),
}

impl ScorerError {
    /// Index of the offending pair, when the error concerns one.
    pub fn pair_index(&self) -> Option<usize> {
        match self {
            ScorerError::EmptyInput { index, .. }
            | ScorerError::UnknownPair { index }
            | ScorerError::InvalidJudgment { index, .. }
            | ScorerError::Transport { index, .. }
            | ScorerError::Timeout { index }
            | ScorerError::Protocol { index, .. } => Some(*index),
            ScorerError::Fixture { .. } | ScorerError::Config(_) => None,
        }
    }

    /// Shifts the pair index by `offset`, for errors raised inside a sub-batch.
    pub(crate) fn offset(self, offset: usize) -> Self {
        match self {
            ScorerError::EmptyInput { index, side } => ScorerError::EmptyInput {
                index: index + offset,
                side,
            },
            ScorerError::UnknownPair { index } => ScorerError::UnknownPair {
                index: index + offset,
            },
            ScorerError::InvalidJudgment { index, reason } => ScorerError::InvalidJudgment {
                index: index + offset,
                reason,
            },
            ScorerError::Transport { index, message } => ScorerError::Transport {
                index: index + offset,
                message,
            },
            ScorerError::Timeout { index } => ScorerError::Timeout {
                index: index + offset,
            },
            ScorerError::Protocol { index, message } => ScorerError::Protocol {
                index: index + offset,
                message,
            },
            other => other,
        }
    }
}

/// One verdict on a text pair from all three output heads.
///
/// `p3` is over (ALIGNED, CONTRADICT, NEUTRAL), `pbin` over
/// (ALIGNED, NOT-ALIGNED); `reg` is a regression value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentJudgment {
    pub p3: [f64; 3],
    pub pbin: [f64; 2],
    pub reg: f64,
}

impl AlignmentJudgment {
    /// Validates the probability vectors and regression range without
    /// renormalizing anything.
    pub fn new(p3: [f64; 3], pbin: [f64; 2], reg: f64) -> Result<Self, String> {
        let judgment = Self { p3, pbin, reg };
        judgment.validate()?;
        Ok(judgment)
    }

    pub fn validate(&self) -> Result<(), String> {
        check_distribution("p3", &self.p3)?;
        check_distribution("pbin", &self.pbin)?;
        if !(self.reg.is_finite() && (0.0..=1.0).contains(&self.reg)) {
            return Err(format!("reg {} outside [0, 1]", self.reg));
        }
        Ok(())
    }

    pub fn aligned_3way(&self) -> f64 {
        self.p3[ALIGNED]
    }

    pub fn aligned_bin(&self) -> f64 {
        self.pbin[ALIGNED]
    }
}

fn check_distribution(name: &str, probs: &[f64]) -> Result<(), String> {
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("{name} has invalid entry {p}"));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(format!("{name} sums to {sum}"));
    }
    Ok(())
}

/// A backend for the alignment function.
///
/// Implementations must be safe to call from several workers at once and
/// must return judgments in input order.
pub trait AlignmentScorer: Send + Sync {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<AlignmentJudgment>, ScorerError>;

    fn score_pair(&self, a: &str, b: &str) -> Result<AlignmentJudgment, ScorerError> {
        let mut out = self.score_batch(&[(a, b)])?;
        Ok(out.remove(0))
    }

    fn describe(&self) -> String;
}

/// Rejects pairs where either side is empty once normalized.
pub fn check_pairs(pairs: &[(&str, &str)]) -> Result<(), ScorerError> {
    for (index, (a, b)) in pairs.iter().enumerate() {
        if normalize(a).is_empty() {
            return Err(ScorerError::EmptyInput { index, side: "a" });
        }
        if normalize(b).is_empty() {
            return Err(ScorerError::EmptyInput { index, side: "b" });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Fixture,
    Lexical,
    Remote,
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScorerKind::Fixture => "fixture",
            ScorerKind::Lexical => "lexical",
            ScorerKind::Remote => "remote",
        })
    }
}

/// Backend selection plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerSpec {
    Fixture {
        table: PathBuf,
    },
    Lexical {
        smoothing: f64,
    },
    Remote {
        endpoint: String,
        timeout_ms: u64,
        batch_size: usize,
        max_in_flight: usize,
    },
}

impl ScorerSpec {
    pub fn kind(&self) -> ScorerKind {
        match self {
            ScorerSpec::Fixture { .. } => ScorerKind::Fixture,
            ScorerSpec::Lexical { .. } => ScorerKind::Lexical,
            ScorerSpec::Remote { .. } => ScorerKind::Remote,
        }
    }

    pub fn build(&self) -> Result<Box<dyn AlignmentScorer>, ScorerError> {
        Ok(match self {
            ScorerSpec::Fixture { table } => Box::new(FixtureScorer::from_path(table)?),
            ScorerSpec::Lexical { smoothing } => Box::new(LexicalScorer::new(*smoothing)?),
            ScorerSpec::Remote {
                endpoint,
                timeout_ms,
                batch_size,
                max_in_flight,
            } => Box::new(RemoteScorer::new(RemoteConfig {
                endpoint: endpoint.clone(),
                timeout: Duration::from_millis(*timeout_ms),
                batch_size: *batch_size,
                max_in_flight: *max_in_flight,
            })?),
        })
    }
}
