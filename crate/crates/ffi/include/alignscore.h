#ifndef ALIGNSCORE_H
#define ALIGNSCORE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Output head read from each judgment.
typedef enum AsHead {
  AS_HEAD_THREE_WAY = 0,
  AS_HEAD_BINARY = 1,
  AS_HEAD_REGRESSION = 2,
} AsHead;

// Claim-scoring mode.
typedef enum AsMode {
  AS_MODE_CHUNK = 0,
  AS_MODE_DOC = 1,
  AS_MODE_SENTENCE = 2,
  AS_MODE_SMART_L = 3,
  AS_MODE_SMART_N = 4,
} AsMode;

// Result code of every exported function.
typedef enum AsStatus {
  AS_STATUS_OK = 0,
  AS_STATUS_NULL_POINTER = 1,
  AS_STATUS_INVALID_UTF8 = 2,
  AS_STATUS_INVALID_ARGUMENT = 3,
  // The scorer rejected the input (empty text, unknown fixture pair).
  AS_STATUS_SCORER = 4,
  // The remote backend failed (transport, timeout, protocol, bad judgment).
  AS_STATUS_BACKEND = 5,
  // A statistic is undefined for the input.
  AS_STATUS_STATS = 6,
  AS_STATUS_PANIC = 7,
} AsStatus;

// Opaque scorer handle.
typedef struct AsScorer AsScorer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer is
// valid until the next call into the library from the same thread.
const char *as_last_error(void);

// Lexical-overlap scorer; `smoothing` must lie in (0, 0.5).
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum AsStatus as_scorer_new_lexical(double smoothing, struct AsScorer **out);

// Fixture scorer backed by a JSONL table of judgments.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum AsStatus as_scorer_new_fixture(const char *path, struct AsScorer **out);

// Client for a remote alignment service.
//
// # Safety
// `endpoint` must be a NUL-terminated string; `out` must be writable.
enum AsStatus as_scorer_new_remote(const char *endpoint,
                                   uint64_t timeout_ms,
                                   size_t batch_size,
                                   size_t max_in_flight,
                                   struct AsScorer **out);

// Releases a scorer; null is ignored.
//
// # Safety
// `scorer` must come from an `as_scorer_new_*` call and not be freed twice.
void as_scorer_free(struct AsScorer *scorer);

// Scores `claim` against `context`. `chunk_budget` of 0 selects the default.
//
// # Safety
// `scorer` must be a live handle, strings NUL-terminated, `out` writable.
enum AsStatus as_align_score(const struct AsScorer *scorer,
                             const char *context,
                             const char *claim,
                             enum AsHead head,
                             enum AsMode mode,
                             size_t chunk_budget,
                             double *out);

// ROC AUC with `labels[i] != 0` as the positive (consistent) class.
//
// # Safety
// `scores` and `labels` must each hold `n` elements; `out` must be writable.
enum AsStatus as_auc_roc(const double *scores, const uint8_t *labels, size_t n, double *out);

// Threshold maximizing balanced accuracy under `score > threshold`.
//
// # Safety
// `scores` and `labels` must each hold `n` elements; outputs must be writable.
enum AsStatus as_tune_threshold(const double *scores,
                                const uint8_t *labels,
                                size_t n,
                                double *out_threshold,
                                double *out_balanced_accuracy);

// # Safety
// `x` and `y` must each hold `n` elements; `out` must be writable.
enum AsStatus as_pearson(const double *x, const double *y, size_t n, double *out);

// # Safety
// `x` and `y` must each hold `n` elements; `out` must be writable.
enum AsStatus as_spearman(const double *x, const double *y, size_t n, double *out);

// Kendall tau-b.
//
// # Safety
// `x` and `y` must each hold `n` elements; `out` must be writable.
enum AsStatus as_kendall(const double *x, const double *y, size_t n, double *out);

// Restores bracket escapes and casing of `claim` using `context`. The
// result must be released with [`as_string_free`].
//
// # Safety
// Strings must be NUL-terminated; `out` must be writable.
enum AsStatus as_clean_claim(const char *claim, const char *context, char **out);

// Releases a string returned by the library; null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void as_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALIGNSCORE_H */
