//! Benchmark harness: data cleaning, protocol statistics and reports.

mod bench;
mod clean;
mod polytope;
pub mod stats;

pub use bench::{
    is_zero_shot, load_benchmark_dir, run_benchmark, Averages, BenchError, BenchOptions,
    BenchmarkKind, BenchmarkReport, DatasetResult, EvalRecord, EvalSplit, Metrics, RunMetadata,
    Target, MAX_FAILURE_RATE, SEEN_IN_TRAINING,
};
pub use clean::clean_claim;
pub use polytope::{polytope_label, PolytopeError, UnknownErrorType};
pub use stats::{
    auc_roc, average_ranks, balanced_accuracy, kendall, pearson, spearman, threshold_candidates,
    tune_threshold, StatsError, ThresholdChoice,
};
