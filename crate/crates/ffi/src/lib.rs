//! C ABI over the alignscore engine.
//!
//! Every function returns an [`AsStatus`]; results go through out-pointers.
//! On failure, [`as_last_error`] describes the most recent error on the
//! calling thread. Strings returned by the library are freed with
//! [`as_string_free`], scorers with [`as_scorer_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;
use std::time::Duration;

use alignscore::eval::{self, StatsError};
use alignscore::metric::{align_score, EvalMode, HeadChoice, MetricConfig, MetricError};
use alignscore::scorer::{
    AlignmentScorer, FixtureScorer, LexicalScorer, RemoteConfig, RemoteScorer, ScorerError,
};
use thiserror::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// The scorer rejected the input (empty text, unknown fixture pair).
    Scorer = 4,
    /// The remote backend failed (transport, timeout, protocol, bad judgment).
    Backend = 5,
    /// A statistic is undefined for the input.
    Stats = 6,
    Panic = 7,
}

/// Output head read from each judgment.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsHead {
    ThreeWay = 0,
    Binary = 1,
    Regression = 2,
}

/// Claim-scoring mode.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsMode {
    Chunk = 0,
    Doc = 1,
    Sentence = 2,
    SmartL = 3,
    SmartN = 4,
}

/// Opaque scorer handle.
pub struct AsScorer {
    inner: Box<dyn AlignmentScorer>,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("{0} is null")]
    Null(&'static str),
    #[error("{0} is not valid UTF-8")]
    Utf8(&'static str),
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl FfiError {
    fn status(&self) -> AsStatus {
        let scorer_status = |e: &ScorerError| match e {
            ScorerError::Transport { .. }
            | ScorerError::Timeout { .. }
            | ScorerError::Protocol { .. }
            | ScorerError::InvalidJudgment { .. } => AsStatus::Backend,
            ScorerError::Config(_) | ScorerError::Fixture { .. } => AsStatus::InvalidArgument,
            ScorerError::EmptyInput { .. } | ScorerError::UnknownPair { .. } => AsStatus::Scorer,
        };
        match self {
            FfiError::Null(_) => AsStatus::NullPointer,
            FfiError::Utf8(_) => AsStatus::InvalidUtf8,
            FfiError::Argument(_) => AsStatus::InvalidArgument,
            FfiError::Metric(MetricError::Scorer(e)) | FfiError::Scorer(e) => scorer_status(e),
            FfiError::Metric(MetricError::EmptyClaim | MetricError::EmptyContext) => {
                AsStatus::Scorer
            }
            FfiError::Metric(_) => AsStatus::InvalidArgument,
            FfiError::Stats(_) => AsStatus::Stats,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

/// Runs `f`, recording any error or panic for [`as_last_error`].
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> AsStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsStatus::Ok,
        Ok(Err(e)) => {
            let status = e.status();
            set_last_error(e.to_string());
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            AsStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8(name))
}

unsafe fn array<'a, T>(p: *const T, n: usize, name: &'static str) -> Result<&'a [T], FfiError> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(FfiError::Null(name));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &'static str) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(FfiError::Null(name));
    }
    out.write(value);
    Ok(())
}

fn into_handle(scorer: impl AlignmentScorer + 'static) -> *mut AsScorer {
    Box::into_raw(Box::new(AsScorer {
        inner: Box::new(scorer),
    }))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn as_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Lexical-overlap scorer; `smoothing` must lie in (0, 0.5).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn as_scorer_new_lexical(
    smoothing: f64,
    out: *mut *mut AsScorer,
) -> AsStatus {
    guard(|| {
        let scorer = LexicalScorer::new(smoothing)?;
        write_out(out, into_handle(scorer), "out")
    })
}

/// Fixture scorer backed by a JSONL table of judgments.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_scorer_new_fixture(
    path: *const c_char,
    out: *mut *mut AsScorer,
) -> AsStatus {
    guard(|| {
        let scorer = FixtureScorer::from_path(Path::new(text(path, "path")?))?;
        write_out(out, into_handle(scorer), "out")
    })
}

/// Client for a remote alignment service.
///
/// # Safety
/// `endpoint` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_scorer_new_remote(
    endpoint: *const c_char,
    timeout_ms: u64,
    batch_size: usize,
    max_in_flight: usize,
    out: *mut *mut AsScorer,
) -> AsStatus {
    guard(|| {
        let scorer = RemoteScorer::new(RemoteConfig {
            endpoint: text(endpoint, "endpoint")?.to_string(),
            timeout: Duration::from_millis(timeout_ms),
            batch_size,
            max_in_flight,
        })?;
        write_out(out, into_handle(scorer), "out")
    })
}

/// Releases a scorer; null is ignored.
///
/// # Safety
/// `scorer` must come from an `as_scorer_new_*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn as_scorer_free(scorer: *mut AsScorer) {
    if !scorer.is_null() {
        drop(Box::from_raw(scorer));
    }
}

/// Scores `claim` against `context`. `chunk_budget` of 0 selects the default.
///
/// # Safety
/// `scorer` must be a live handle, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn as_align_score(
    scorer: *const AsScorer,
    context: *const c_char,
    claim: *const c_char,
    head: AsHead,
    mode: AsMode,
    chunk_budget: usize,
    out: *mut f64,
) -> AsStatus {
    guard(|| {
        let scorer = scorer.as_ref().ok_or(FfiError::Null("scorer"))?;
        let defaults = MetricConfig::default();
        let config = MetricConfig {
            head: match head {
                AsHead::ThreeWay => HeadChoice::ThreeWayAligned,
                AsHead::Binary => HeadChoice::BinaryAligned,
                AsHead::Regression => HeadChoice::Regression,
            },
            mode: match mode {
                AsMode::Chunk => EvalMode::Chunk,
                AsMode::Doc => EvalMode::Doc,
                AsMode::Sentence => EvalMode::Sentence,
                AsMode::SmartL => EvalMode::SmartL,
                AsMode::SmartN => EvalMode::SmartN(1),
            },
            chunk_budget: if chunk_budget == 0 {
                defaults.chunk_budget
            } else {
                chunk_budget
            },
            ..defaults
        };
        let score = align_score(
            text(context, "context")?,
            text(claim, "claim")?,
            scorer.inner.as_ref(),
            &config,
        )?;
        write_out(out, score, "out")
    })
}

/// ROC AUC with `labels[i] != 0` as the positive (consistent) class.
///
/// # Safety
/// `scores` and `labels` must each hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_auc_roc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> AsStatus {
    guard(|| {
        let labels: Vec<bool> = array(labels, n, "labels")?
            .iter()
            .map(|l| *l != 0)
            .collect();
        let value = eval::auc_roc(array(scores, n, "scores")?, &labels)?;
        write_out(out, value, "out")
    })
}

/// Threshold maximizing balanced accuracy under `score > threshold`.
///
/// # Safety
/// `scores` and `labels` must each hold `n` elements; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_tune_threshold(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out_threshold: *mut f64,
    out_balanced_accuracy: *mut f64,
) -> AsStatus {
    guard(|| {
        let labels: Vec<bool> = array(labels, n, "labels")?
            .iter()
            .map(|l| *l != 0)
            .collect();
        let choice = eval::tune_threshold(array(scores, n, "scores")?, &labels)?;
        write_out(out_threshold, choice.threshold, "out_threshold")?;
        write_out(
            out_balanced_accuracy,
            choice.balanced_accuracy,
            "out_balanced_accuracy",
        )
    })
}

unsafe fn correlation(
    f: fn(&[f64], &[f64]) -> Result<f64, StatsError>,
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> AsStatus {
    guard(|| {
        let value = f(array(x, n, "x")?, array(y, n, "y")?)?;
        write_out(out, value, "out")
    })
}

/// # Safety
/// `x` and `y` must each hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_pearson(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> AsStatus {
    correlation(eval::pearson, x, y, n, out)
}

/// # Safety
/// `x` and `y` must each hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_spearman(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> AsStatus {
    correlation(eval::spearman, x, y, n, out)
}

/// Kendall tau-b.
///
/// # Safety
/// `x` and `y` must each hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_kendall(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> AsStatus {
    correlation(eval::kendall, x, y, n, out)
}

/// Restores bracket escapes and casing of `claim` using `context`. The
/// result must be released with [`as_string_free`].
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn as_clean_claim(
    claim: *const c_char,
    context: *const c_char,
    out: *mut *mut c_char,
) -> AsStatus {
    guard(|| {
        let cleaned = eval::clean_claim(text(claim, "claim")?, text(context, "context")?);
        let cleaned = CString::new(cleaned).map_err(|e| FfiError::Argument(e.to_string()))?;
        write_out(out, cleaned.into_raw(), "out")
    })
}

/// Releases a string returned by the library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn as_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
