use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{check_pairs, AlignmentJudgment, AlignmentScorer, ScorerError};
use crate::segment::normalize;

/// One line of a fixture table file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub a: String,
    pub b: String,
    pub p3: [f64; 3],
    pub pbin: [f64; 2],
    pub reg: f64,
}

/// Pure lookup table from normalized text pairs to judgments.
/// Unknown pairs are an error.
#[derive(Debug, Clone, Default)]
pub struct FixtureScorer {
    table: HashMap<(String, String), AlignmentJudgment>,
    source: Option<PathBuf>,
}

impl FixtureScorer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: &str, b: &str, judgment: AlignmentJudgment) {
        self.table.insert((normalize(a), normalize(b)), judgment);
    }

    pub fn from_entries<I>(entries: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = FixtureEntry>,
    {
        let mut scorer = Self::new();
        for (i, entry) in entries.into_iter().enumerate() {
            let judgment = AlignmentJudgment::new(entry.p3, entry.pbin, entry.reg)
                .map_err(|e| format!("entry {}: {e}", i + 1))?;
            scorer.insert(&entry.a, &entry.b, judgment);
        }
        Ok(scorer)
    }

    /// Loads a JSONL table of [`FixtureEntry`] lines.
    pub fn from_path(path: &Path) -> Result<Self, ScorerError> {
        let fail = |message: String| ScorerError::Fixture {
            path: path.to_path_buf(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry = serde_json::from_str(line)
                .map_err(|e| fail(format!("line {}: {e}", lineno + 1)))?;
            entries.push(entry);
        }
        let mut scorer = Self::from_entries(entries).map_err(fail)?;
        scorer.source = Some(path.to_path_buf());
        Ok(scorer)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl AlignmentScorer for FixtureScorer {
    fn score_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<AlignmentJudgment>, ScorerError> {
        check_pairs(pairs)?;
        pairs
            .iter()
            .enumerate()
            .map(|(index, (a, b))| {
                self.table
                    .get(&(normalize(a), normalize(b)))
                    .copied()
                    .ok_or(ScorerError::UnknownPair { index })
            })
            .collect()
    }

    fn describe(&self) -> String {
        match &self.source {
            Some(path) => format!("fixture({})", path.display()),
            None => format!("fixture(<{} entries>)", self.table.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn judgment(p: f64) -> AlignmentJudgment {
        AlignmentJudgment::new([p, 1.0 - p, 0.0], [p, 1.0 - p], p).unwrap()
    }

    #[test]
    fn table_lookup_is_exact() {
        let mut s = FixtureScorer::new();
        let j = AlignmentJudgment::new([0.7, 0.2, 0.1], [0.6, 0.4], 0.5).unwrap();
        s.insert("c1", "s1", j);
        assert_eq!(s.score_pair("c1", "s1").unwrap(), j);
    }

    #[test]
    fn unknown_pair_is_an_error() {
        let mut s = FixtureScorer::new();
        s.insert("c1", "s1", judgment(0.5));
        let err = s.score_batch(&[("c1", "s1"), ("c1", "s2")]).unwrap_err();
        assert!(matches!(err, ScorerError::UnknownPair { index: 1 }));
    }

    #[test]
    fn batch_preserves_order() {
        let mut s = FixtureScorer::new();
        for (i, p) in [0.1, 0.5, 0.9].iter().enumerate() {
            s.insert("ctx", &format!("s{i}"), judgment(*p));
        }
        let out = s
            .score_batch(&[("ctx", "s2"), ("ctx", "s0"), ("ctx", "s1")])
            .unwrap();
        let regs: Vec<f64> = out.iter().map(|j| j.reg).collect();
        assert_eq!(regs, [0.9, 0.1, 0.5]);
        assert!(s.score_batch(&[]).unwrap().is_empty());
    }

    #[test]
    fn lookup_keys_are_whitespace_normalized() {
        let mut s = FixtureScorer::new();
        s.insert("a  b", "c", judgment(0.3));
        assert_eq!(s.score_pair("a b", " c\n").unwrap().reg, 0.3);
    }

    #[test]
    fn invalid_table_entry_is_rejected() {
        let bad = FixtureEntry {
            a: "a".into(),
            b: "b".into(),
            p3: [0.5, 0.5, 0.5],
            pbin: [0.5, 0.5],
            reg: 0.5,
        };
        assert!(FixtureScorer::from_entries([bad]).is_err());
    }
}
