//! Question + answer to declarative sentence.
//!
//! [`TemplateConverter`] is a rule-based stand-in for a seq2seq rewriting
//! model. It covers the common English wh-question shapes and rejects the
//! rest; anything implementing [`DeclarativeConverter`] can replace it.

use thiserror::Error;

use crate::segment::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("question is empty")]
    EmptyQuestion,
    #[error("answer is empty")]
    EmptyAnswer,
    #[error("unsupported question form: {0}")]
    Unsupported(String),
}

pub trait DeclarativeConverter: Send + Sync {
    fn convert(&self, question: &str, answer: &str) -> Result<String, ConversionError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TemplateConverter;

impl DeclarativeConverter for TemplateConverter {
    fn convert(&self, question: &str, answer: &str) -> Result<String, ConversionError> {
        declarative_claim(question, answer)
    }
}

const BE_AUX: &[&str] = &["is", "was", "are", "were"];
const DO_AUX: &[&str] = &["did", "does", "do"];
const MODAL_AUX: &[&str] = &[
    "will", "would", "can", "could", "should", "has", "have", "had",
];
const WH_WORDS: &[&str] = &[
    "what", "which", "who", "whom", "whose", "where", "when", "how",
];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "by", "for", "from", "of", "to", "with", "about", "into", "after", "before",
    "during", "since", "until",
];
const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];
const WEEKDAYS: &[&str] = &[
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

const IRREGULAR_PAST: &[(&str, &str)] = &[
    ("be", "was"),
    ("become", "became"),
    ("begin", "began"),
    ("break", "broke"),
    ("bring", "brought"),
    ("build", "built"),
    ("buy", "bought"),
    ("choose", "chose"),
    ("come", "came"),
    ("cut", "cut"),
    ("do", "did"),
    ("draw", "drew"),
    ("drive", "drove"),
    ("eat", "ate"),
    ("fall", "fell"),
    ("fight", "fought"),
    ("find", "found"),
    ("fly", "flew"),
    ("get", "got"),
    ("give", "gave"),
    ("go", "went"),
    ("grow", "grew"),
    ("have", "had"),
    ("hit", "hit"),
    ("hold", "held"),
    ("keep", "kept"),
    ("know", "knew"),
    ("lead", "led"),
    ("leave", "left"),
    ("let", "let"),
    ("lose", "lost"),
    ("make", "made"),
    ("meet", "met"),
    ("pay", "paid"),
    ("put", "put"),
    ("rise", "rose"),
    ("run", "ran"),
    ("say", "said"),
    ("see", "saw"),
    ("sell", "sold"),
    ("send", "sent"),
    ("set", "set"),
    ("sing", "sang"),
    ("sink", "sank"),
    ("speak", "spoke"),
    ("spend", "spent"),
    ("stand", "stood"),
    ("steal", "stole"),
    ("take", "took"),
    ("teach", "taught"),
    ("tell", "told"),
    ("think", "thought"),
    ("throw", "threw"),
    ("understand", "understood"),
    ("win", "won"),
    ("write", "wrote"),
];

/// Rewrites a question and its answer into one declarative sentence.
pub fn declarative_claim(question: &str, answer: &str) -> Result<String, ConversionError> {
    let question = normalize(question);
    let answer = normalize(answer);
    let question = question.trim_end_matches(['?', ' ']);
    if question.is_empty() {
        return Err(ConversionError::EmptyQuestion);
    }
    if answer.is_empty() {
        return Err(ConversionError::EmptyAnswer);
    }
    let words: Vec<&str> = question.split(' ').collect();
    let lower: Vec<String> = words.iter().map(|w| w.to_lowercase()).collect();

    let body = if WH_WORDS.contains(&lower[0].as_str()) {
        leading_wh(&words, &lower, &answer)?
    } else {
        embedded_wh(&words, &lower, &answer)?
    };
    Ok(finish(&body))
}

fn leading_wh(words: &[&str], lower: &[String], answer: &str) -> Result<String, ConversionError> {
    let unsupported = || ConversionError::Unsupported(words.join(" "));
    let wh = lower[0].as_str();
    let second = lower.get(1).map(String::as_str).unwrap_or("");

    // "How many X are in Y" -> "ANSWER X are in Y"
    if wh == "how" && matches!(second, "many" | "much") && words.len() > 2 {
        return Ok(format!("{answer} {}", words[2..].join(" ")));
    }
    // "What year did X happen" -> "X happened in ANSWER"
    if matches!(wh, "what" | "which") && words.len() > 3 && DO_AUX.contains(&lower[2].as_str()) {
        let prep = if matches!(
            second,
            "year" | "month" | "day" | "date" | "century" | "decade"
        ) {
            time_preposition(answer)
        } else {
            Some("in")
        };
        return do_support(&words[3..], &lower[2], prep, answer).ok_or_else(unsupported);
    }
    match wh {
        "when" | "where" => {
            let prep = if wh == "when" {
                time_preposition(answer)
            } else {
                Some("in")
            };
            if words.len() < 3 {
                return Err(unsupported());
            }
            if DO_AUX.contains(&second) {
                return do_support(&words[2..], second, prep, answer).ok_or_else(unsupported);
            }
            if BE_AUX.contains(&second) {
                return Ok(be_support(&words[2..], words[1], prep, answer));
            }
            Err(unsupported())
        }
        "what" | "which" | "who" | "whom" => {
            if BE_AUX.contains(&second) && words.len() > 2 {
                let rest = &words[2..];
                let last = rest.last().map(|w| w.to_lowercase()).unwrap_or_default();
                if PREPOSITIONS.contains(&last.as_str()) {
                    // "What is X known for" -> "X is known for ANSWER"
                    return Ok(format!("{} {answer}", insert_aux(rest, words[1])));
                }
                return Ok(format!("{} {} {answer}", rest.join(" "), words[1]));
            }
            if DO_AUX.contains(&second) || MODAL_AUX.contains(&second) {
                // Object questions ("What did X do") need a verb frame we do not model.
                return Err(unsupported());
            }
            if words.len() < 2 {
                return Err(unsupported());
            }
            // Subject questions: "Who wrote Hamlet" -> "ANSWER wrote Hamlet"
            Ok(format!("{answer} {}", words[1..].join(" ")))
        }
        _ => Err(unsupported()),
    }
}

/// Replaces a wh-phrase in the middle of a question with the answer.
fn embedded_wh(words: &[&str], lower: &[String], answer: &str) -> Result<String, ConversionError> {
    let pos = lower
        .iter()
        .position(|w| WH_WORDS.contains(&w.as_str()))
        .ok_or_else(|| ConversionError::Unsupported(words.join(" ")))?;
    let mut out: Vec<String> = words[..pos].iter().map(|w| w.to_string()).collect();
    let skip = match lower[pos].as_str() {
        "what" | "which" | "whose" | "how" if pos + 1 < words.len() => 2,
        "where" => {
            out.push("in".to_string());
            1
        }
        "when" => {
            if let Some(prep) = time_preposition(answer) {
                out.push(prep.to_string());
            }
            1
        }
        _ => 1,
    };
    out.push(answer.to_string());
    out.extend(words[pos + skip..].iter().map(|w| w.to_string()));
    Ok(out.join(" "))
}

/// "did X close" -> "X closed PREP ANSWER". A proper-noun or pronoun subject
/// ends before the first lowercase word, which is the verb; otherwise the
/// verb is taken as the last word.
fn do_support(rest: &[&str], aux: &str, prep: Option<&str>, answer: &str) -> Option<String> {
    let verb_at = subject_end(rest).unwrap_or(rest.len().checked_sub(1)?);
    if verb_at == 0 {
        return None;
    }
    let verb = rest[verb_at];
    let verb = match aux.to_lowercase().as_str() {
        "did" => past_tense(verb),
        "does" => third_person(verb),
        _ => verb.to_string(),
    };
    let mut head: Vec<String> = rest[..verb_at].iter().map(|w| w.to_string()).collect();
    head.push(verb);
    head.extend(rest[verb_at + 1..].iter().map(|w| w.to_string()));
    Some(with_prep(head.join(" "), prep, answer))
}

const PRONOUNS: &[&str] = &["he", "she", "it", "they", "we", "you", "i"];

fn subject_end(rest: &[&str]) -> Option<usize> {
    let first = rest.first()?;
    if PRONOUNS.contains(&first.to_lowercase().as_str()) {
        return (rest.len() > 1).then_some(1);
    }
    if !first.chars().next().is_some_and(char::is_uppercase) {
        return None;
    }
    let end = rest
        .iter()
        .position(|w| !w.chars().next().is_some_and(char::is_uppercase))?;
    Some(end)
}

/// "was X born" -> "X was born PREP ANSWER"
fn be_support(rest: &[&str], aux: &str, prep: Option<&str>, answer: &str) -> String {
    with_prep(insert_aux(rest, aux), prep, answer)
}

/// Places the auxiliary before a trailing participle (and any trailing
/// preposition), else at the end.
fn insert_aux(rest: &[&str], aux: &str) -> String {
    let mut split = rest.len();
    if split > 1 && PREPOSITIONS.contains(&rest[split - 1].to_lowercase().as_str()) {
        split -= 1;
    }
    if split > 1 && is_participle(rest[split - 1]) {
        split -= 1;
    }
    let mut out: Vec<&str> = rest[..split].to_vec();
    out.push(aux);
    out.extend_from_slice(&rest[split..]);
    out.join(" ")
}

fn with_prep(head: String, prep: Option<&str>, answer: &str) -> String {
    let stranded = head
        .rsplit(' ')
        .next()
        .is_some_and(|w| PREPOSITIONS.contains(&w.to_lowercase().as_str()));
    match prep.filter(|_| !stranded) {
        Some(p) => format!("{head} {p} {answer}"),
        None => format!("{head} {answer}"),
    }
}

fn is_participle(word: &str) -> bool {
    let w = word.to_lowercase();
    w.len() > 3 && (w.ends_with("ed") || w.ends_with("en"))
        || matches!(
            w.as_str(),
            "born" | "built" | "made" | "held" | "found" | "known" | "sold"
        )
}

/// "on" for specific days, nothing when the answer already starts with a
/// preposition, "in" otherwise.
fn time_preposition(answer: &str) -> Option<&'static str> {
    let lower = answer.to_lowercase();
    let first = lower.split(' ').next().unwrap_or("");
    if PREPOSITIONS.contains(&first) {
        return None;
    }
    let tokens: Vec<&str> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    let has_month = tokens.iter().any(|t| MONTHS.contains(t));
    let has_day = tokens
        .iter()
        .any(|t| t.len() <= 2 && t.chars().all(|c| c.is_ascii_digit()));
    if tokens.iter().any(|t| WEEKDAYS.contains(t)) || (has_month && has_day) {
        Some("on")
    } else {
        Some("in")
    }
}

pub fn past_tense(verb: &str) -> String {
    let lower = verb.to_lowercase();
    if let Some((_, past)) = IRREGULAR_PAST.iter().find(|(base, _)| *base == lower) {
        return past.to_string();
    }
    let chars: Vec<char> = lower.chars().collect();
    let n = chars.len();
    if lower.ends_with('e') {
        return format!("{verb}d");
    }
    if n >= 2 && chars[n - 1] == 'y' && !is_vowel(chars[n - 2]) {
        return format!("{}ied", &verb[..verb.len() - 1]);
    }
    // One-syllable consonant-vowel-consonant stems double: stop -> stopped.
    if (3..=4).contains(&n)
        && !chars[..n - 2].iter().any(|c| is_vowel(*c))
        && !is_vowel(chars[n - 1])
        && !matches!(chars[n - 1], 'w' | 'x' | 'y')
        && is_vowel(chars[n - 2])
        && !is_vowel(chars[n - 3])
    {
        return format!("{verb}{}ed", chars[n - 1]);
    }
    format!("{verb}ed")
}

pub fn third_person(verb: &str) -> String {
    let lower = verb.to_lowercase();
    if lower == "have" {
        return "has".to_string();
    }
    let chars: Vec<char> = lower.chars().collect();
    let n = chars.len();
    if ["s", "sh", "ch", "x", "z", "o"]
        .iter()
        .any(|s| lower.ends_with(s))
    {
        return format!("{verb}es");
    }
    if n >= 2 && chars[n - 1] == 'y' && !is_vowel(chars[n - 2]) {
        return format!("{}ies", &verb[..verb.len() - 1]);
    }
    format!("{verb}s")
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn finish(body: &str) -> String {
    let mut chars = body.chars();
    let mut out: String = match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    };
    if !out.ends_with(['.', '!']) {
        out.push('.');
    }
    out
}
