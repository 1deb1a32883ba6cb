//! Benchmark statistics: ROC AUC, balanced accuracy, threshold tuning and
//! the Pearson / Spearman / Kendall tau-b correlations.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {min} values, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("no {0} examples; both classes are required")]
    MissingClass(&'static str),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("correlation undefined: {0}")]
    Undefined(&'static str),
}

fn check_pair_lengths<A, B>(a: &[A], b: &[B], min: usize) -> Result<(), StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < min {
        return Err(StatsError::TooShort { min, got: a.len() });
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

fn class_counts(labels: &[bool]) -> Result<(usize, usize), StatsError> {
    let positives = labels.iter().filter(|l| **l).count();
    let negatives = labels.len() - positives;
    if positives == 0 {
        return Err(StatsError::MissingClass("positive"));
    }
    if negatives == 0 {
        return Err(StatsError::MissingClass("negative"));
    }
    Ok((positives, negatives))
}

/// 1-based ranks with tied values sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Area under the ROC curve via the Mann-Whitney rank-sum statistic; ties
/// between a positive and a negative count one half.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64, StatsError> {
    check_pair_lengths(scores, labels, 2)?;
    check_finite(scores)?;
    let (positives, negatives) = class_counts(labels)?;
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l)
        .map(|(r, _)| r)
        .sum();
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

/// Mean of true-positive and true-negative rates.
pub fn balanced_accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64, StatsError> {
    check_pair_lengths(predictions, labels, 1)?;
    let (positives, negatives) = class_counts(labels)?;
    let (mut tp, mut tn) = (0usize, 0usize);
    for (pred, label) in predictions.iter().zip(labels) {
        match (pred, label) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            _ => {}
        }
    }
    Ok((tp as f64 / positives as f64 + tn as f64 / negatives as f64) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub balanced_accuracy: f64,
}

/// Candidate thresholds: midpoints between consecutive distinct scores plus
/// one value below the minimum and one above the maximum.
pub fn threshold_candidates(scores: &[f64]) -> Vec<f64> {
    let mut distinct = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let (Some(&lo), Some(&hi)) = (distinct.first(), distinct.last()) else {
        return Vec::new();
    };
    let margin = |v: f64| 1e-6_f64.max(v.abs() * 1e-9);
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(lo - margin(lo));
    out.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    out.push(hi + margin(hi));
    out
}

/// Picks the candidate threshold maximizing balanced accuracy of the rule
/// `score > threshold => positive`. Ties go to the smallest threshold.
pub fn tune_threshold(scores: &[f64], labels: &[bool]) -> Result<ThresholdChoice, StatsError> {
    check_pair_lengths(scores, labels, 1)?;
    check_finite(scores)?;
    let (positives, negatives) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sweep candidates upward; `below` counts items with score <= candidate.
    // BA is compared through its exact numerator tp * neg + tn * pos.
    let mut best: Option<(u128, f64)> = None;
    let mut below = 0;
    let (mut neg_below, mut pos_below) = (0usize, 0usize);
    for candidate in threshold_candidates(scores) {
        while below < order.len() && scores[order[below]] <= candidate {
            if labels[order[below]] {
                pos_below += 1;
            } else {
                neg_below += 1;
            }
            below += 1;
        }
        let key = (positives - pos_below) as u128 * negatives as u128
            + neg_below as u128 * positives as u128;
        if best.is_none_or(|(k, _)| key > k) {
            best = Some((key, candidate));
        }
    }
    let (_, threshold) = best.expect("at least one candidate");
    let predictions: Vec<bool> = scores.iter().map(|s| *s > threshold).collect();
    Ok(ThresholdChoice {
        threshold,
        balanced_accuracy: balanced_accuracy(&predictions, labels)?,
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair_lengths(x, y, 3)?;
    check_finite(x)?;
    check_finite(y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Undefined("constant input"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair_lengths(x, y, 3)?;
    check_finite(x)?;
    check_finite(y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b in O(n log n) (Knight's merge-sort algorithm).
pub fn kendall(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair_lengths(x, y, 3)?;
    check_finite(x)?;
    check_finite(y)?;
    // -0.0 and 0.0 must compare equal under total_cmp below.
    let x: Vec<f64> = x.iter().map(|v| v + 0.0).collect();
    let y: Vec<f64> = y.iter().map(|v| v + 0.0).collect();
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let tie_pairs = |len: u64| len * (len.saturating_sub(1)) / 2;
    let total = tie_pairs(n as u64);

    // Pairs tied in x, and tied in both x and y.
    let (mut x_ties, mut joint_ties) = (0u64, 0u64);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && x[order[j]] == x[order[i]] {
            j += 1;
        }
        x_ties += tie_pairs((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut m = k + 1;
            while m < j && y[order[m]] == y[order[k]] {
                m += 1;
            }
            joint_ties += tie_pairs((m - k) as u64);
            k = m;
        }
        i = j;
    }

    // Discordant pairs = inversions of y in x-order.
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let swaps = count_inversions(&mut ys);

    let mut y_ties = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        y_ties += tie_pairs((j - i) as u64);
        i = j;
    }

    let denom_x = total - x_ties;
    let denom_y = total - y_ties;
    if denom_x == 0 || denom_y == 0 {
        return Err(StatsError::Undefined("all pairs tied"));
    }
    let numerator =
        total as f64 - x_ties as f64 - y_ties as f64 + joint_ties as f64 - 2.0 * swaps as f64;
    Ok((numerator / ((denom_x as f64).sqrt() * (denom_y as f64).sqrt())).clamp(-1.0, 1.0))
}

/// Sorts `values` ascending and returns the number of strict inversions.
fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mut buf = values.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut l, mut r, mut k) = (start, mid, start);
            while l < mid && r < end {
                if values[r].total_cmp(&values[l]) == Ordering::Less {
                    buf[k] = values[r];
                    swaps += (mid - l) as u64;
                    r += 1;
                } else {
                    buf[k] = values[l];
                    l += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - l)].copy_from_slice(&values[l..mid]);
            k += mid - l;
            buf[k..k + (end - r)].copy_from_slice(&values[r..end]);
            start = end;
        }
        values.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}
