//! Factual-consistency scoring with a unified alignment function.
//!
//! A context is split into chunks of roughly 350 tokens and a claim into
//! sentences; every (chunk, sentence) pair is judged by an
//! [`AlignmentScorer`](scorer::AlignmentScorer) and the claim score is the
//! mean over sentences of the best-supporting chunk.
//!
//! ```
//! use alignscore::metric::{align_score, MetricConfig};
//! use alignscore::scorer::LexicalScorer;
//!
//! let scorer = LexicalScorer::default();
//! let score = align_score(
//!     "The cat sat on the mat. It was warm.",
//!     "The cat sat on the mat.",
//!     &scorer,
//!     &MetricConfig::default(),
//! )
//! .unwrap();
//! assert!(score > 0.9);
//! ```

pub mod config;
pub mod corpus;
pub mod eval;
pub mod metric;
pub mod scorer;
pub mod segment;
