//! Sentence segmentation, token budgeting and sentence-boundary chunking.
//!
//! Text is normalized first (control characters stripped, whitespace runs
//! collapsed to a single space), so every sentence boundary falls on a single
//! space and joining the sentences with `" "` reproduces the normalized text.

use std::ops::Range;

use thiserror::Error;

/// Default chunk budget in (approximate) model tokens.
pub const DEFAULT_CHUNK_BUDGET: usize = 350;

/// Default ratio of subword tokens to whitespace words.
pub const DEFAULT_INFLATION: f64 = 1.3;

#[derive(Debug, Error, PartialEq)]
pub enum SegmentError {
    #[error("chunk budget must be at least 1 token, got {0}")]
    InvalidBudget(usize),
    #[error("token inflation factor must be finite and >= 1.0, got {0}")]
    InvalidInflation(f64),
}

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "rev", "gen", "col", "lt",
    "sgt", "capt", "gov", "sen", "rep", "pres", "hon", "messrs", "mme", "vs", "no", "nos", "fig",
    "figs", "vol", "vols", "pp", "ed", "eds", "approx", "dept", "est", "inc", "ltd", "co", "corp",
    "bros", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
    "e.g", "i.e", "cf", "al", "ca", "op", "viz",
];

/// Collapse whitespace runs to one space, drop control characters and trim.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else if c.is_control() || is_invisible_format(c) {
            continue;
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

fn is_invisible_format(c: char) -> bool {
    matches!(
        c,
        '\u{200b}' | '\u{200c}' | '\u{200d}' | '\u{2060}' | '\u{feff}' | '\u{00ad}'
    )
}

/// Number of whitespace-delimited words that contain at least one word character.
pub fn count_words(text: &str) -> usize {
    text.split_whitespace()
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .count()
}

/// Approximates a subword tokenizer by inflating the whitespace word count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenCounter {
    inflation: f64,
}

impl TokenCounter {
    pub fn new(inflation: f64) -> Result<Self, SegmentError> {
        if !inflation.is_finite() || inflation < 1.0 {
            return Err(SegmentError::InvalidInflation(inflation));
        }
        Ok(Self { inflation })
    }

    /// Plain whitespace-word counting.
    pub fn words() -> Self {
        Self { inflation: 1.0 }
    }

    pub fn inflation(&self) -> f64 {
        self.inflation
    }

    /// `ceil(words * inflation)`; zero iff the text has no word characters.
    pub fn count(&self, text: &str) -> usize {
        let words = count_words(text);
        if words == 0 {
            return 0;
        }
        // Guard against 10 * 1.3 = 13.000000000000002 rounding up to 14.
        let scaled = words as f64 * self.inflation;
        let rounded = scaled.round();
        if (scaled - rounded).abs() < 1e-9 {
            rounded as usize
        } else {
            scaled.ceil() as usize
        }
    }
}

impl Default for TokenCounter {
    fn default() -> Self {
        Self {
            inflation: DEFAULT_INFLATION,
        }
    }
}

/// Token count under the default inflation factor.
pub fn count_tokens(text: &str) -> usize {
    TokenCounter::default().count(text)
}

/// A document split into sentences, with per-sentence token counts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SegmentedText {
    sentences: Vec<String>,
    token_counts: Vec<usize>,
}

impl SegmentedText {
    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }

    pub fn token_counts(&self) -> &[usize] {
        &self.token_counts
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// The normalized source text.
    pub fn joined(&self) -> String {
        self.sentences.join(" ")
    }

    /// Builds a segmentation from explicit parts. Used for synthetic documents
    /// whose token counts are chosen directly.
    pub fn from_parts(sentences: Vec<String>, token_counts: Vec<usize>) -> Option<Self> {
        if sentences.len() != token_counts.len() || sentences.iter().any(|s| s.trim().is_empty()) {
            return None;
        }
        Some(Self {
            sentences,
            token_counts,
        })
    }
}

/// A run of consecutive sentences packed under a token budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub sentence_range: Range<usize>,
    pub text: String,
    pub token_count: usize,
}

/// Segments `text` using the default token counter.
pub fn split_sentences(text: &str) -> SegmentedText {
    split_sentences_with(text, &TokenCounter::default())
}

pub fn split_sentences_with(text: &str, counter: &TokenCounter) -> SegmentedText {
    let normalized = normalize(text);
    let sentences: Vec<String> = sentence_spans(&normalized)
        .into_iter()
        .map(|r| normalized[r].to_string())
        .collect();
    let token_counts = sentences.iter().map(|s| counter.count(s)).collect();
    SegmentedText {
        sentences,
        token_counts,
    }
}

/// Byte ranges of sentences within already-normalized text.
fn sentence_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    if text.is_empty() {
        return spans;
    }
    let mut start = 0;
    // Every boundary candidate is a single space (text is normalized).
    for (idx, _) in text.match_indices(' ') {
        let before = &text[start..idx];
        let after = &text[idx + 1..];
        if is_boundary(before, after) {
            spans.push(start..idx);
            start = idx + 1;
        }
    }
    spans.push(start..text.len());
    spans
}

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}', '\u{00bb}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201c}', '\u{2018}', '\u{00ab}'];

fn is_boundary(before: &str, after: &str) -> bool {
    let last_token = before.rsplit(' ').next().unwrap_or(before);
    let core = last_token.trim_end_matches(CLOSERS);
    let Some(terminal) = core.chars().last() else {
        return false;
    };
    if !matches!(terminal, '.' | '!' | '?' | '\u{2026}') {
        return false;
    }
    let next = after.split(' ').next().unwrap_or("");
    let Some(first) = next.trim_start_matches(OPENERS).chars().next() else {
        return false;
    };
    if first.is_lowercase() {
        return false;
    }
    // Bare punctuation ("- ", "...") after a terminal is not a new sentence.
    if !next.chars().any(char::is_alphanumeric) {
        return false;
    }
    if terminal == '.' && !core.ends_with("..") {
        let word = core.trim_end_matches('.').trim_start_matches(OPENERS);
        if is_abbreviation(word) {
            return false;
        }
    }
    true
}

fn is_abbreviation(word: &str) -> bool {
    if word.is_empty() {
        return false;
    }
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let mut chars = word.chars();
    // Single initials: "J. K. Rowling".
    if let (Some(c), None) = (chars.next(), chars.next()) {
        return c.is_uppercase();
    }
    // Dotted acronyms: "U.S", "a.m".
    word.contains('.')
        && word
            .split('.')
            .all(|part| part.chars().count() == 1 && part.chars().all(char::is_alphabetic))
}

/// Greedy left-to-right packing of sentences into chunks of at most `budget`
/// tokens. A sentence that alone exceeds the budget becomes its own chunk.
pub fn chunk_context(seg: &SegmentedText, budget: usize) -> Result<Vec<Chunk>, SegmentError> {
    if budget == 0 {
        return Err(SegmentError::InvalidBudget(budget));
    }
    let mut chunks = Vec::new();
    let mut open_start = 0;
    let mut open_count = 0;
    for (i, &count) in seg.token_counts.iter().enumerate() {
        if i > open_start && open_count + count > budget {
            chunks.push(make_chunk(seg, open_start..i, open_count));
            open_start = i;
            open_count = 0;
        }
        open_count += count;
    }
    if open_start < seg.len() {
        chunks.push(make_chunk(seg, open_start..seg.len(), open_count));
    }
    Ok(chunks)
}

fn make_chunk(seg: &SegmentedText, range: Range<usize>, token_count: usize) -> Chunk {
    Chunk {
        text: seg.sentences[range.clone()].join(" "),
        sentence_range: range,
        token_count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg_with_counts(counts: &[usize]) -> SegmentedText {
        let sentences = (0..counts.len()).map(|i| format!("S{i}.")).collect();
        SegmentedText::from_parts(sentences, counts.to_vec()).unwrap()
    }

    #[test]
    fn empty_text_has_no_sentences() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences(" \n\t ").is_empty());
    }

    #[test]
    fn single_sentence() {
        assert_eq!(
            split_sentences("Hello world.").sentences(),
            ["Hello world."]
        );
    }

    #[test]
    fn title_abbreviation_is_not_a_boundary() {
        let seg = split_sentences("Dr. Smith arrived. He sat down.");
        assert_eq!(seg.sentences(), ["Dr. Smith arrived.", "He sat down."]);
    }

    #[test]
    fn quotes_and_parens_close_sentences() {
        let seg = split_sentences("He said \"stop.\" Then he left. (It was late.) Fine!");
        assert_eq!(
            seg.sentences(),
            [
                "He said \"stop.\"",
                "Then he left.",
                "(It was late.)",
                "Fine!"
            ]
        );
    }

    #[test]
    fn normalization_collapses_whitespace_and_controls() {
        assert_eq!(normalize("  a\u{0007}b \n\n c\t"), "ab c");
        let seg = split_sentences("One.\n\n  Two.");
        assert_eq!(seg.joined(), "One. Two.");
    }

    #[test]
    fn word_counting() {
        assert_eq!(count_words(""), 0);
        assert_eq!(TokenCounter::words().count("one two three"), 3);
        assert_eq!(TokenCounter::words().count("-- ... !!"), 0);
        assert_eq!(count_tokens("one two three"), 4);
        // 10 * 1.3 must not round up to 14.
        assert_eq!(count_tokens("a b c d e f g h i j"), 13);
    }

    #[test]
    fn inflation_is_validated() {
        assert!(TokenCounter::new(0.5).is_err());
        assert!(TokenCounter::new(f64::NAN).is_err());
        assert!(TokenCounter::new(1.0).is_ok());
    }

    #[test]
    fn three_small_sentences_fit_one_chunk() {
        let chunks = chunk_context(&seg_with_counts(&[100, 100, 100]), 350).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 300);
        assert_eq!(chunks[0].sentence_range, 0..3);
    }

    #[test]
    fn overflowing_insertions_start_new_chunks() {
        let chunks = chunk_context(&seg_with_counts(&[200, 200, 200]), 350).unwrap();
        let ranges: Vec<_> = chunks.iter().map(|c| c.sentence_range.clone()).collect();
        assert_eq!(ranges, [0..1, 1..2, 2..3]);
        assert!(chunks.iter().all(|c| c.token_count == 200));
    }

    #[test]
    fn oversized_sentence_is_kept_whole() {
        let chunks = chunk_context(&seg_with_counts(&[500]), 350).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 500);
    }

    #[test]
    fn zero_budget_rejected() {
        assert_eq!(
            chunk_context(&seg_with_counts(&[1]), 0),
            Err(SegmentError::InvalidBudget(0))
        );
    }

    #[test]
    fn chunk_text_joins_member_sentences() {
        let seg = split_sentences_with("A b. C d. E f.", &TokenCounter::words());
        let chunks = chunk_context(&seg, 4).unwrap();
        assert_eq!(chunks[0].text, "A b. C d.");
        assert_eq!(chunks[1].text, "E f.");
    }
}
