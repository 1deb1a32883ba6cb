//! Synthetic sample generation: token masking plus pluggable perturbations
//! (paraphrasing, mask infilling, extractive summarization).

use std::collections::HashMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scorer::content_words;
use crate::segment::{normalize, split_sentences};

pub const MASK_TOKEN: &str = "<mask>";
pub const DEFAULT_MASK_RATIO: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("cannot mask empty text")]
    EmptyText,
    #[error("mask ratio must be in (0, 1), got {0}")]
    InvalidRatio(f64),
}

/// Text with some whitespace tokens replaced by [`MASK_TOKEN`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedText {
    pub tokens: Vec<String>,
    /// Sorted, distinct indices into `tokens`.
    pub positions: Vec<usize>,
}

impl MaskedText {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Number of positions masked for a text of `token_count` tokens.
pub fn mask_count(token_count: usize, ratio: f64) -> usize {
    ((ratio * token_count as f64).round() as usize).clamp(1, token_count)
}

/// Masks `max(1, round(ratio * n))` distinct whitespace tokens chosen
/// uniformly without replacement; deterministic in `(text, ratio, seed)`.
pub fn mask_tokens(text: &str, ratio: f64, seed: u64) -> Result<MaskedText, SynthError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(SynthError::InvalidRatio(ratio));
    }
    let mut tokens: Vec<String> = normalize(text).split(' ').map(str::to_string).collect();
    if tokens.iter().all(String::is_empty) {
        return Err(SynthError::EmptyText);
    }
    let k = mask_count(tokens.len(), ratio);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = index::sample(&mut rng, tokens.len(), k).into_vec();
    positions.sort_unstable();
    for &p in &positions {
        tokens[p] = MASK_TOKEN.to_string();
    }
    Ok(MaskedText { tokens, positions })
}

/// Produces a meaning-preserving rewrite of a sentence.
pub trait Paraphraser: Send + Sync {
    fn paraphrase(&self, text: &str) -> String;
}

/// Fills masked positions, producing a (usually) meaning-changed sentence.
pub trait Infiller: Send + Sync {
    fn infill(&self, masked: &MaskedText) -> String;
}

/// Selects a summary for a document; `None` when nothing can be extracted.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, document: &str) -> Option<String>;
}

/// Word-for-word synonym substitution, preserving capitalization and
/// surrounding punctuation.
#[derive(Debug, Clone)]
pub struct SynonymParaphraser {
    table: HashMap<String, String>,
}

const SYNONYMS: &[(&str, &str)] = &[
    ("big", "large"),
    ("small", "little"),
    ("begin", "start"),
    ("began", "started"),
    ("buy", "purchase"),
    ("bought", "purchased"),
    ("quick", "fast"),
    ("quickly", "rapidly"),
    ("help", "assist"),
    ("helped", "assisted"),
    ("show", "display"),
    ("showed", "displayed"),
    ("end", "finish"),
    ("ended", "finished"),
    ("often", "frequently"),
    ("about", "around"),
    ("near", "close to"),
    ("many", "numerous"),
    ("city", "town"),
    ("famous", "well-known"),
    ("important", "significant"),
    ("built", "constructed"),
    ("make", "create"),
    ("made", "created"),
    ("use", "employ"),
    ("used", "employed"),
    ("get", "obtain"),
    ("got", "obtained"),
    ("old", "aged"),
    ("large", "big"),
    ("start", "begin"),
    ("started", "began"),
    ("hard", "difficult"),
    ("job", "occupation"),
    ("movie", "film"),
    ("record", "recording"),
    ("received", "got"),
    ("several", "various"),
    ("later", "afterwards"),
];

impl Default for SynonymParaphraser {
    fn default() -> Self {
        Self::new(SYNONYMS.iter().map(|(a, b)| (a.to_string(), b.to_string())))
    }
}

impl SynonymParaphraser {
    pub fn new<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        Self {
            table: pairs.into_iter().collect(),
        }
    }
}

impl Paraphraser for SynonymParaphraser {
    fn paraphrase(&self, text: &str) -> String {
        normalize(text)
            .split(' ')
            .map(|token| {
                let start = token.find(char::is_alphanumeric).unwrap_or(token.len());
                let end = token.rfind(char::is_alphanumeric).map_or(start, |i| {
                    i + token[i..].chars().next().map_or(1, char::len_utf8)
                });
                if start >= end {
                    return token.to_string();
                }
                let word = &token[start..end];
                match self.table.get(&word.to_lowercase()) {
                    Some(replacement) => {
                        let replacement = if word.chars().next().is_some_and(char::is_uppercase) {
                            capitalize(replacement)
                        } else {
                            replacement.clone()
                        };
                        format!("{}{replacement}{}", &token[..start], &token[end..])
                    }
                    None => token.to_string(),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Keeps mask placeholders in place of a language-model infill.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaskRetention;

impl Infiller for MaskRetention {
    fn infill(&self, masked: &MaskedText) -> String {
        masked.text()
    }
}

/// Extractive summarizer ranking sentences by mean document frequency of
/// their content words. Picks the top `sentences` and keeps document order.
#[derive(Debug, Clone, Copy)]
pub struct FrequencyExtractor {
    pub sentences: usize,
}

impl Default for FrequencyExtractor {
    fn default() -> Self {
        Self { sentences: 2 }
    }
}

impl Summarizer for FrequencyExtractor {
    fn summarize(&self, document: &str) -> Option<String> {
        let seg = split_sentences(document);
        if seg.is_empty() || self.sentences == 0 {
            return None;
        }
        let mut freq: HashMap<String, usize> = HashMap::new();
        let sentence_words: Vec<_> = seg.sentences().iter().map(|s| content_words(s)).collect();
        for words in &sentence_words {
            for w in words {
                *freq.entry(w.clone()).or_default() += 1;
            }
        }
        let mut ranked: Vec<(usize, f64)> = sentence_words
            .iter()
            .enumerate()
            .map(|(i, words)| {
                let total: usize = words.iter().map(|w| freq[w]).sum();
                (i, total as f64 / words.len().max(1) as f64)
            })
            .collect();
        // Highest score first; earlier sentence wins ties.
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut picked: Vec<usize> = ranked
            .into_iter()
            .take(self.sentences)
            .map(|(i, _)| i)
            .collect();
        picked.sort_unstable();
        Some(
            picked
                .into_iter()
                .map(|i| seg.sentences()[i].as_str())
                .collect::<Vec<_>>()
                .join(" "),
        )
    }
}

/// Stable 64-bit seed for row `row` of `dataset` under a global seed.
pub fn derive_seed(seed: u64, dataset: &str, row: u64) -> u64 {
    // FNV-1a over the dataset name, mixed with seed and row by splitmix64.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in dataset.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(splitmix(seed ^ h) ^ row)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_tokens_one_mask() {
        let m = mask_tokens("a b c d", 0.25, 7).unwrap();
        assert_eq!(m.positions.len(), 1);
        assert_eq!(m.tokens.iter().filter(|t| *t == MASK_TOKEN).count(), 1);
    }

    #[test]
    fn eight_tokens_two_distinct_masks() {
        for seed in 0..1000 {
            let m = mask_tokens("a b c d e f g h", 0.25, seed).unwrap();
            assert_eq!(m.positions.len(), 2);
            assert!(m.positions[0] < m.positions[1]);
        }
    }

    #[test]
    fn masking_is_deterministic() {
        let text = "the quick brown fox jumps over the lazy dog today";
        assert_eq!(mask_tokens(text, 0.25, 42), mask_tokens(text, 0.25, 42));
    }

    #[test]
    fn masking_errors() {
        assert_eq!(mask_tokens("", 0.25, 0), Err(SynthError::EmptyText));
        assert_eq!(mask_tokens("a", 0.0, 0), Err(SynthError::InvalidRatio(0.0)));
        assert_eq!(mask_tokens("a", 1.0, 0), Err(SynthError::InvalidRatio(1.0)));
    }

    #[test]
    fn tiny_text_still_masks_one() {
        assert_eq!(mask_tokens("solo", 0.25, 3).unwrap().text(), MASK_TOKEN);
    }

    #[test]
    fn synonym_paraphrase_keeps_case_and_punctuation() {
        let p = SynonymParaphraser::default();
        assert_eq!(
            p.paraphrase("Big cities began (quickly)."),
            "Large cities started (rapidly)."
        );
        assert_eq!(p.paraphrase("Nothing to swap."), "Nothing to swap.");
    }

    #[test]
    fn extractor_keeps_document_order() {
        let doc = "Cats sleep a lot. Dogs bark at cats. Cats and dogs play. Rain fell.";
        let summary = FrequencyExtractor { sentences: 2 }.summarize(doc).unwrap();
        assert_eq!(summary, "Dogs bark at cats. Cats and dogs play.");
        assert!(FrequencyExtractor::default().summarize("").is_none());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
        assert_ne!(derive_seed(1, "a", 0), derive_seed(1, "b", 0));
        assert_eq!(derive_seed(5, "x", 9), derive_seed(5, "x", 9));
    }
}
