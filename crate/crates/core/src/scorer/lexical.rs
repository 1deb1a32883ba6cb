use std::collections::BTreeSet;

use super::{check_pairs, AlignmentJudgment, AlignmentScorer, ScorerError};

pub const DEFAULT_SMOOTHING: f64 = 0.01;

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "be", "been",
    "before", "being", "but", "by", "can", "could", "did", "do", "does", "for", "from", "had",
    "has", "have", "he", "her", "hers", "him", "his", "how", "i", "if", "in", "into", "is", "it",
    "its", "may", "me", "might", "my", "of", "on", "or", "our", "over", "she", "should", "so",
    "some", "than", "that", "the", "their", "them", "then", "there", "these", "they", "this",
    "those", "to", "under", "up", "us", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your",
];

/// Lowercased alphanumeric tokens of `text` that are not stopwords.
pub fn content_words(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Share of `b`'s content words found in `a`, clamped to
/// `[smoothing, 1 - smoothing]`. CONTRADICT and NEUTRAL split the remainder.
pub fn lexical_overlap_judgment(a: &str, b: &str, smoothing: f64) -> AlignmentJudgment {
    let words_a = content_words(a);
    let words_b = content_words(b);
    let shared = words_b.intersection(&words_a).count();
    let ratio = shared as f64 / words_b.len().max(1) as f64;
    let aligned = ratio.clamp(smoothing, 1.0 - smoothing);
    let rest = (1.0 - aligned) / 2.0;
    AlignmentJudgment {
        p3: [aligned, rest, rest],
        pbin: [aligned, 1.0 - aligned],
        reg: aligned,
    }
}

/// Deterministic word-overlap stand-in for a trained alignment model.
#[derive(Debug, Clone, Copy)]
pub struct LexicalScorer {
    smoothing: f64,
}

impl LexicalScorer {
    pub fn new(smoothing: f64) -> Result<Self, ScorerError> {
        if !(smoothing > 0.0 && smoothing < 0.5) {
            return Err(ScorerError::Config(format!(
                "lexical smoothing must be in (0, 0.5), got {smoothing}"
            )));
        }
        Ok(Self { smoothing })
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }
}

impl Default for LexicalScorer {
    fn default() -> Self {
        Self {
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

impl AlignmentScorer for LexicalScorer {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<AlignmentJudgment>, ScorerError> {
        check_pairs(pairs)?;
        Ok(pairs
            .iter()
            .map(|(a, b)| lexical_overlap_judgment(a, b, self.smoothing))
            .collect())
    }

    fn describe(&self) -> String {
        format!("lexical(smoothing={})", self.smoothing)
    }
}
