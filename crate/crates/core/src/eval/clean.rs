//! Claim cleanup for benchmark data: PTB bracket escapes and lost casing.

use std::collections::HashMap;

const ESCAPES: &[(&str, &str, bool)] = &[
    // (escape, replacement, opening)
    ("-LRB-", "(", true),
    ("-RRB-", ")", false),
    ("-LSB-", "[", true),
    ("-RSB-", "]", false),
    ("-LCB-", "{", true),
    ("-RCB-", "}", false),
];

/// Restores escaped brackets, applies the context's casing to words the
/// context contains, and capitalizes the first letter of every sentence.
pub fn clean_claim(claim: &str, context: &str) -> String {
    let unescaped = replace_escapes(claim);
    let casing = context_casing(context);
    let recased = map_words(&unescaped, |word| {
        casing
            .get(&word.to_lowercase())
            .cloned()
            .unwrap_or_else(|| word.to_string())
    });
    capitalize_sentences(&recased)
}

fn replace_escapes(text: &str) -> String {
    let mut out = text.to_string();
    for (escape, bracket, opening) in ESCAPES {
        if !out.contains(escape) {
            continue;
        }
        // "x -LRB- y -RRB- z" -> "x (y) z"
        let (spaced, joined) = if *opening {
            (format!("{escape} "), bracket.to_string())
        } else {
            (format!(" {escape}"), bracket.to_string())
        };
        out = out.replace(&spaced, &joined).replace(escape, bracket);
    }
    out
}

/// Function words whose sentence-initial capital says nothing about casing.
const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "if", "of", "in", "on", "at", "to", "by", "for", "with",
    "from", "as", "is", "was", "are", "were", "be", "it", "its", "he", "she", "they", "we", "you",
    "this", "that", "these", "those", "there", "his", "her", "their", "our",
];

/// Preferred surface form for each lowercased context word: the most frequent
/// form among occurrences that do not start a sentence, falling back to all
/// occurrences except for function words; ties go to the earliest form.
fn context_casing(context: &str) -> HashMap<String, String> {
    struct Forms {
        mid: Vec<(String, usize)>,
        all: Vec<(String, usize)>,
    }
    fn bump(list: &mut Vec<(String, usize)>, form: &str) {
        match list.iter_mut().find(|(f, _)| f == form) {
            Some((_, n)) => *n += 1,
            None => list.push((form.to_string(), 1)),
        }
    }
    fn best(list: &[(String, usize)]) -> Option<&String> {
        let max = list.iter().map(|(_, n)| *n).max()?;
        list.iter().find(|(_, n)| *n == max).map(|(f, _)| f)
    }

    let mut forms: HashMap<String, Forms> = HashMap::new();
    for (word, sentence_start) in words_with_position(context) {
        let entry = forms.entry(word.to_lowercase()).or_insert(Forms {
            mid: Vec::new(),
            all: Vec::new(),
        });
        bump(&mut entry.all, word);
        if !sentence_start {
            bump(&mut entry.mid, word);
        }
    }
    forms
        .into_iter()
        .filter_map(|(key, f)| {
            best(&f.mid)
                .or_else(|| {
                    (!FUNCTION_WORDS.contains(&key.as_str()))
                        .then(|| best(&f.all))
                        .flatten()
                })
                .cloned()
                .map(|form| (key, form))
        })
        .collect()
}

/// Alphanumeric runs, each flagged when it opens a sentence.
fn words_with_position(text: &str) -> Vec<(&str, bool)> {
    let mut out = Vec::new();
    let mut at_start = true;
    let mut after_terminal = false;
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if word_start.is_none() {
                word_start = Some(i);
            }
            after_terminal = false;
            continue;
        }
        if let Some(s) = word_start.take() {
            out.push((&text[s..i], at_start));
            at_start = false;
        }
        if matches!(c, '.' | '!' | '?') {
            after_terminal = true;
        } else if c.is_whitespace() && after_terminal {
            at_start = true;
            after_terminal = false;
        } else if !matches!(c, '"' | '\'' | ')' | ']' | '}' | '\u{201d}' | '\u{2019}') {
            after_terminal = false;
        }
    }
    if let Some(s) = word_start {
        out.push((&text[s..], at_start));
    }
    out
}

fn map_words(text: &str, mut f: impl FnMut(&str) -> String) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word_start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            word_start.get_or_insert(i);
        } else {
            if let Some(s) = word_start.take() {
                out.push_str(&f(&text[s..i]));
            }
            out.push(c);
        }
    }
    if let Some(s) = word_start {
        out.push_str(&f(&text[s..]));
    }
    out
}

fn capitalize_sentences(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut at_start = true;
    let mut after_terminal = false;
    for c in text.chars() {
        if at_start && c.is_alphabetic() {
            out.extend(c.to_uppercase());
            at_start = false;
            after_terminal = false;
            continue;
        }
        if c.is_alphanumeric() {
            at_start = false;
            after_terminal = false;
        } else if matches!(c, '.' | '!' | '?') {
            after_terminal = true;
        } else if c.is_whitespace() && after_terminal {
            at_start = true;
            after_terminal = false;
        }
        out.push(c);
    }
    out
}
