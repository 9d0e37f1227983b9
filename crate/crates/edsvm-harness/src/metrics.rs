//! Classification metrics for score/label vectors.
//!
//! ROC-AUC is computed by the trapezoid rule over the tie-grouped threshold
//! sweep, which equals the pairwise-comparison probability with ties counted
//! as one half. PR-AUC uses average precision (step-wise summation) rather
//! than trapezoidal interpolation, which can overestimate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("scores and labels differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("labels must be -1 or +1, got {0}")]
    BadLabel(f64),
    #[error("ranking metrics need both classes present")]
    SingleClass,
    #[error("scores must be finite")]
    NonFiniteScore,
}

/// Threshold-and-ranking metric suite; every value lies in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    pub roc_auc: f64,
    pub pr_auc: f64,
    /// Set when no positive predictions exist, in which case precision (and
    /// f1) are reported as 0 by convention.
    pub precision_undefined: bool,
}

/// Confusion counts at `sign(score - threshold)` (ties to the positive
/// class), plus ranking metrics over the raw scores.
pub fn compute_metrics(scores: &[f64], labels: &[f64], threshold: f64) -> Result<Metrics, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore);
    }
    let mut tp = 0.0;
    let mut tn = 0.0;
    let mut fp = 0.0;
    let mut fnr = 0.0;
    let mut pos = 0usize;
    let mut neg = 0usize;
    for (&s, &y) in scores.iter().zip(labels) {
        if y != 1.0 && y != -1.0 {
            return Err(MetricsError::BadLabel(y));
        }
        let pred = if s - threshold >= 0.0 { 1.0 } else { -1.0 };
        match (pred > 0.0, y > 0.0) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fnr += 1.0,
            (false, false) => tn += 1.0,
        }
        if y > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let n = scores.len() as f64;
    let accuracy = (tp + tn) / n;
    let sensitivity = tp / (tp + fnr);
    let specificity = tn / (tn + fp);
    let precision_undefined = tp + fp == 0.0;
    let precision = if precision_undefined { 0.0 } else { tp / (tp + fp) };
    let f1 = if precision + sensitivity > 0.0 {
        2.0 * precision * sensitivity / (precision + sensitivity)
    } else {
        0.0
    };

    Ok(Metrics {
        accuracy,
        sensitivity,
        specificity,
        precision,
        f1,
        roc_auc: roc_auc(scores, labels, pos, neg),
        pr_auc: average_precision(scores, labels, pos),
        precision_undefined,
    })
}

/// Indices sorted by descending score, grouping ties.
fn descending_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    idx
}

fn roc_auc(scores: &[f64], labels: &[f64], pos: usize, neg: usize) -> f64 {
    let order = descending_order(scores);
    let mut area = 0.0;
    let mut tp_prev = 0.0;
    let mut fp_prev = 0.0;
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut k = 0;
    while k < order.len() {
        // Consume a whole tie group before emitting a curve vertex.
        let s = scores[order[k]];
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] > 0.0 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            k += 1;
        }
        area += (fp - fp_prev) * (tp + tp_prev) / 2.0;
        tp_prev = tp;
        fp_prev = fp;
    }
    area / (pos as f64 * neg as f64)
}

/// Average precision: step-wise sum of precision at each newly recalled
/// positive, with tie groups contributing their group precision.
fn average_precision(scores: &[f64], labels: &[f64], pos: usize) -> f64 {
    let order = descending_order(scores);
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut ap = 0.0;
    let mut k = 0;
    while k < order.len() {
        let s = scores[order[k]];
        let mut group_tp = 0.0;
        let mut group_fp = 0.0;
        while k < order.len() && scores[order[k]] == s {
            if labels[order[k]] > 0.0 {
                group_tp += 1.0;
            } else {
                group_fp += 1.0;
            }
            k += 1;
        }
        tp += group_tp;
        fp += group_fp;
        if group_tp > 0.0 {
            let precision_here = tp / (tp + fp);
            ap += precision_here * group_tp;
        }
    }
    ap / pos as f64
}

/// Brute-force pairwise ROC-AUC: fraction of positive-negative pairs ranked
/// correctly, ties counted as one half. Quadratic; serves as the oracle the
/// sweep implementation is tested against.
pub fn roc_auc_pairwise(scores: &[f64], labels: &[f64]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), labels.len()));
    }
    let mut wins = 0.0;
    let mut total = 0.0;
    for (i, (&si, &yi)) in scores.iter().zip(labels).enumerate() {
        if yi <= 0.0 {
            continue;
        }
        for (j, (&sj, &yj)) in scores.iter().zip(labels).enumerate() {
            if i == j || yj > 0.0 {
                continue;
            }
            total += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    if total == 0.0 {
        return Err(MetricsError::SingleClass);
    }
    Ok(wins / total)
}
