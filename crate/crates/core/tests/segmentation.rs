mod common;

use std::fs;

use alignscore::segment::{
    chunk_context, count_tokens, count_words, normalize, split_sentences, split_sentences_with,
    SegmentedText, TokenCounter,
};
use proptest::prelude::*;

/// Gold documents: one sentence per line, blank lines between documents.
fn gold_documents() -> Vec<Vec<String>> {
    let text = fs::read_to_string(common::data_dir().join("segmentation/sentences.txt")).unwrap();
    let mut docs = vec![Vec::new()];
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        if line.trim().is_empty() {
            if !docs.last().unwrap().is_empty() {
                docs.push(Vec::new());
            }
        } else {
            docs.last_mut().unwrap().push(line.to_string());
        }
    }
    docs.retain(|d| !d.is_empty());
    docs
}

#[test]
fn hand_labeled_fixture() {
    let docs = gold_documents();
    assert_eq!(docs.iter().map(Vec::len).sum::<usize>(), 50);
    for gold in docs {
        let seg = split_sentences(&gold.join(" "));
        assert_eq!(seg.sentences(), gold.as_slice());
    }
}

#[test]
fn fixture_sentences_are_fixed_points() {
    for sentence in gold_documents().into_iter().flatten() {
        let seg = split_sentences(&sentence);
        assert_eq!(seg.sentences(), [sentence]);
    }
}

#[test]
fn spec_examples() {
    assert!(split_sentences("").is_empty());
    assert_eq!(
        split_sentences("Hello world.").sentences(),
        ["Hello world."]
    );
    assert_eq!(
        split_sentences("Dr. Smith arrived. He sat down.").sentences(),
        ["Dr. Smith arrived.", "He sat down."]
    );
    assert_eq!(count_tokens(""), 0);
    assert_eq!(TokenCounter::words().count("one two three"), 3);
}

#[test]
fn paragraph_word_count() {
    let text =
        fs::read_to_string(common::data_dir().join("segmentation/paragraph_87.txt")).unwrap();
    let independent = text.split_whitespace().count();
    assert_eq!(independent, 87);
    assert_eq!(count_words(&text), 87);
    assert_eq!(TokenCounter::words().count(&text), 87);
    // 87 * 1.3 = 113.1, rounded up.
    assert_eq!(count_tokens(&text), 114);
}

#[test]
fn tokens_are_zero_only_without_word_characters() {
    assert_eq!(count_tokens("... -- !!"), 0);
    assert_eq!(count_tokens("a"), 2);
    assert_eq!(TokenCounter::words().count("  x  "), 1);
}

fn seg_from_counts(counts: &[usize]) -> SegmentedText {
    let sentences = (0..counts.len()).map(|i| format!("S{i}.")).collect();
    SegmentedText::from_parts(sentences, counts.to_vec()).unwrap()
}

fn ranges(chunks: &[alignscore::segment::Chunk]) -> Vec<(usize, usize)> {
    chunks
        .iter()
        .map(|c| (c.sentence_range.start, c.sentence_range.end))
        .collect()
}

#[test]
fn packing_examples() {
    let c = chunk_context(&seg_from_counts(&[100, 100, 100]), 350).unwrap();
    assert_eq!(ranges(&c), [(0, 3)]);
    assert_eq!(c[0].token_count, 300);

    let c = chunk_context(&seg_from_counts(&[200, 200, 200]), 350).unwrap();
    assert_eq!(ranges(&c), [(0, 1), (1, 2), (2, 3)]);
    assert!(c.iter().all(|c| c.token_count == 200));

    let c = chunk_context(&seg_from_counts(&[500]), 350).unwrap();
    assert_eq!(ranges(&c), [(0, 1)]);
    assert_eq!(c[0].token_count, 500);

    assert!(chunk_context(&seg_from_counts(&[1]), 0).is_err());
}

/// Greedy packing restated directly on the count list.
fn oracle_packing(counts: &[usize], budget: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut total = 0;
    for (i, c) in counts.iter().enumerate() {
        if i > start && total + c > budget {
            out.push((start, i));
            start = i;
            total = 0;
        }
        total += c;
    }
    if start < counts.len() {
        out.push((start, counts.len()));
    }
    out
}

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}",
        "[A-Z][a-z]{0,6}",
        "[0-9]{1,4}",
        Just("Dr.".to_string()),
        Just("U.S.".to_string()),
        Just("(see".to_string()),
        Just("it)".to_string()),
        Just("\"Yes,\"".to_string()),
        Just("...".to_string()),
    ]
}

fn document() -> impl Strategy<Value = String> {
    let sentence = (
        prop::collection::vec(word(), 1..15),
        prop::sample::select(vec![".", "!", "?", ""]),
    )
        .prop_map(|(words, end)| format!("{}{end}", words.join(" ")));
    (
        prop::collection::vec(sentence, 0..12),
        prop::sample::select(vec![" ", "  ", "\n", " \t "]),
    )
        .prop_map(|(sentences, sep)| sentences.join(sep))
}

proptest! {
    #[test]
    fn segmentation_invariants(text in document()) {
        let seg = split_sentences(&text);
        prop_assert_eq!(seg.sentences().len(), seg.token_counts().len());
        prop_assert_eq!(seg.joined(), normalize(&text));
        for s in seg.sentences() {
            prop_assert!(!s.trim().is_empty());
        }
        prop_assert_eq!(split_sentences(&text), seg);
    }

    #[test]
    fn chunk_invariants(text in document(), budget in 1usize..80) {
        let seg = split_sentences_with(&text, &TokenCounter::default());
        let chunks = chunk_context(&seg, budget).unwrap();
        prop_assert_eq!(ranges(&chunks), oracle_packing(seg.token_counts(), budget));
        let mut next = 0;
        for c in &chunks {
            prop_assert_eq!(c.sentence_range.start, next);
            prop_assert!(c.sentence_range.end > c.sentence_range.start);
            next = c.sentence_range.end;
            let sum: usize = seg.token_counts()[c.sentence_range.clone()].iter().sum();
            prop_assert_eq!(c.token_count, sum);
            if c.sentence_range.len() >= 2 {
                prop_assert!(c.token_count <= budget);
            }
            if c.token_count > budget {
                prop_assert_eq!(c.sentence_range.len(), 1);
            }
        }
        prop_assert_eq!(next, seg.len());
    }

    #[test]
    fn packing_matches_oracle(counts in prop::collection::vec(0usize..400, 0..40), budget in 1usize..500) {
        let chunks = chunk_context(&seg_from_counts(&counts), budget).unwrap();
        prop_assert_eq!(ranges(&chunks), oracle_packing(&counts, budget));
    }

    #[test]
    fn extracted_sentence_is_idempotent(text in document()) {
        for s in split_sentences(&text).sentences() {
            let again = split_sentences(s);
            prop_assert_eq!(again.sentences(), [s.clone()]);
        }
    }
}
