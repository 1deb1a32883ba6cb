use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// The seven upstream task families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Nli,
    FactVerification,
    Paraphrase,
    Sts,
    Qa,
    Ir,
    Summarization,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Nli,
        Task::FactVerification,
        Task::Paraphrase,
        Task::Sts,
        Task::Qa,
        Task::Ir,
        Task::Summarization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Nli => "nli",
            Task::FactVerification => "fact_verification",
            Task::Paraphrase => "paraphrase",
            Task::Sts => "sts",
            Task::Qa => "qa",
            Task::Ir => "ir",
            Task::Summarization => "summarization",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Dev,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinLabel {
    Aligned,
    NotAligned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeWayLabel {
    Aligned,
    Contradict,
    Neutral,
}

/// A label together with the scheme it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    Bin(BinLabel),
    ThreeWay(ThreeWayLabel),
    Reg(f64),
}

impl Label {
    pub fn scheme(&self) -> &'static str {
        match self {
            Label::Bin(_) => "bin",
            Label::ThreeWay(_) => "3way",
            Label::Reg(_) => "reg",
        }
    }

    fn to_value(self) -> Value {
        match self {
            Label::Bin(BinLabel::Aligned) | Label::ThreeWay(ThreeWayLabel::Aligned) => {
                "aligned".into()
            }
            Label::Bin(BinLabel::NotAligned) => "not_aligned".into(),
            Label::ThreeWay(ThreeWayLabel::Contradict) => "contradict".into(),
            Label::ThreeWay(ThreeWayLabel::Neutral) => "neutral".into(),
            Label::Reg(v) => serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number),
        }
    }

    fn from_parts(scheme: &str, value: &Value) -> Result<Self, String> {
        match (scheme, value) {
            ("bin", Value::String(s)) => match s.as_str() {
                "aligned" => Ok(Label::Bin(BinLabel::Aligned)),
                "not_aligned" => Ok(Label::Bin(BinLabel::NotAligned)),
                other => Err(format!("label {other:?} not in bin scheme")),
            },
            ("3way", Value::String(s)) => match s.as_str() {
                "aligned" => Ok(Label::ThreeWay(ThreeWayLabel::Aligned)),
                "contradict" => Ok(Label::ThreeWay(ThreeWayLabel::Contradict)),
                "neutral" => Ok(Label::ThreeWay(ThreeWayLabel::Neutral)),
                other => Err(format!("label {other:?} not in 3way scheme")),
            },
            ("reg", Value::Number(n)) => match n.as_f64() {
                Some(v) if (0.0..=1.0).contains(&v) => Ok(Label::Reg(v)),
                _ => Err(format!("regression label {n} outside [0, 1]")),
            },
            ("bin" | "3way" | "reg", other) => Err(format!(
                "label {other} has the wrong type for scheme {scheme}"
            )),
            (other, _) => Err(format!("unknown label scheme {other:?}")),
        }
    }
}

/// One record of the unified alignment corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentExample {
    pub text_a: String,
    pub text_b: String,
    pub label: Label,
    pub task: Task,
    pub dataset: String,
    pub split: Split,
}

/// On-disk shape of an [`AlignmentExample`].
#[derive(Debug, Serialize, Deserialize)]
struct RawExample {
    text_a: String,
    text_b: String,
    label_scheme: String,
    label: Value,
    task: String,
    dataset: String,
    split: String,
}

impl AlignmentExample {
    pub fn validate(&self) -> Result<(), String> {
        if self.text_a.trim().is_empty() {
            return Err("text_a is empty".into());
        }
        if self.text_b.trim().is_empty() {
            return Err("text_b is empty".into());
        }
        if self.dataset.trim().is_empty() {
            return Err("dataset tag is empty".into());
        }
        if let Label::Reg(v) = self.label {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("regression label {v} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn to_json_line(&self) -> String {
        let raw = RawExample {
            text_a: self.text_a.clone(),
            text_b: self.text_b.clone(),
            label_scheme: self.label.scheme().to_string(),
            label: self.label.to_value(),
            task: self.task.to_string(),
            dataset: self.dataset.clone(),
            split: match self.split {
                Split::Train => "train".into(),
                Split::Dev => "dev".into(),
            },
        };
        serde_json::to_string(&raw).expect("example serializes")
    }

    /// Parses and validates one corpus line.
    pub fn from_json_line(line: &str) -> Result<Self, String> {
        let raw: RawExample = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let example = AlignmentExample {
            label: Label::from_parts(&raw.label_scheme, &raw.label)?,
            task: raw.task.parse()?,
            split: raw.split.parse()?,
            text_a: raw.text_a,
            text_b: raw.text_b,
            dataset: raw.dataset,
        };
        example.validate()?;
        Ok(example)
    }
}

/// One invalid line found by [`validate_corpus`]; lines are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub line: usize,
    pub reason: String,
}

/// Checks every non-blank line of a corpus file.
pub fn validate_corpus(text: &str) -> Vec<Violation> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .filter_map(|(i, line)| {
            AlignmentExample::from_json_line(line)
                .err()
                .map(|reason| Violation {
                    line: i + 1,
                    reason,
                })
        })
        .collect()
}
