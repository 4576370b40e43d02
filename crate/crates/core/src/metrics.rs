//! Evaluation metrics and small statistical helpers: ROC AUC, macro-F1,
//! accuracy, Spearman rank correlation, and the basic bootstrap interval.

use crate::discretize::quantile_sorted;
use crate::error::{AuditError, Result};

/// Average ranks (1-based) of `values`, with tied values sharing the mean
/// of the ranks they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end (0-based) share rank mean of (start+1)..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

/// Area under the ROC curve for binary labels, by the Mann-Whitney
/// statistic: the fraction of (positive, negative) pairs where the
/// positive outscores the negative, ties counted 0.5.
///
/// `labels` must contain only 0 and 1, with both classes present.
pub fn auc(scores: &[f64], labels: &[u32]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(AuditError::InvalidArgument(format!(
            "auc: {} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(AuditError::InvalidArgument("auc: empty input".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(AuditError::InvalidArgument(format!(
            "auc: labels must be 0/1, found {bad}"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(AuditError::InvalidArgument(
            "auc: non-finite score".into(),
        ));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(AuditError::InsufficientData(
            "auc: both classes must be present".into(),
        ));
    }
    let ranks = average_ranks(scores);
    let rank_sum_pos: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Macro-averaged F1: the unweighted mean of per-class F1 over every class
/// that occurs in the truth or the predictions. A class with zero
/// precision and recall contributes F1 = 0; a class occurring in neither
/// vector is skipped.
pub fn macro_f1(pred: &[u32], truth: &[u32]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(AuditError::InvalidArgument(format!(
            "macro_f1: {} predictions vs {} truth labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(AuditError::InvalidArgument("macro_f1: empty input".into()));
    }
    let c = (pred.iter().chain(truth).max().copied().unwrap() + 1) as usize;
    let mut tp = vec![0u64; c];
    let mut fp = vec![0u64; c];
    let mut fne = vec![0u64; c];
    for (&p, &t) in pred.iter().zip(truth) {
        if p == t {
            tp[p as usize] += 1;
        } else {
            fp[p as usize] += 1;
            fne[t as usize] += 1;
        }
    }
    let mut total = 0.0;
    let mut classes = 0usize;
    for k in 0..c {
        if tp[k] + fp[k] + fne[k] == 0 {
            continue; // class absent from both vectors
        }
        classes += 1;
        let p_den = tp[k] + fp[k];
        let r_den = tp[k] + fne[k];
        let precision = if p_den > 0 {
            tp[k] as f64 / p_den as f64
        } else {
            0.0
        };
        let recall = if r_den > 0 {
            tp[k] as f64 / r_den as f64
        } else {
            0.0
        };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(total / classes as f64)
}

/// Fraction of exact matches.
pub fn accuracy(pred: &[u32], truth: &[u32]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(AuditError::InvalidArgument(format!(
            "accuracy: {} predictions vs {} truth labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(AuditError::InvalidArgument("accuracy: empty input".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Spearman rank correlation with average-rank tie handling (Pearson
/// correlation of the rank vectors). Errors when either input has zero
/// rank variance (correlation undefined).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(AuditError::InvalidArgument(format!(
            "spearman: {} vs {} values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(AuditError::InsufficientData(
            "spearman: need at least 2 pairs".into(),
        ));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0; // mean rank is fixed
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean).powi(2);
        var_y += (b - mean).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(AuditError::InsufficientData(
            "spearman: an input is constant; correlation undefined".into(),
        ));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// 95% basic-bootstrap interval: `[2θ̂ − q_0.975, 2θ̂ − q_0.025]` where the
/// quantiles come from the bootstrap replicate distribution (linear
/// interpolation). Returns `(low, high)`.
pub fn basic_bootstrap_ci(theta_hat: f64, replicates: &[f64]) -> Result<(f64, f64)> {
    if replicates.len() < 20 {
        return Err(AuditError::InsufficientData(format!(
            "bootstrap CI needs at least 20 replicates, got {}",
            replicates.len()
        )));
    }
    let mut sorted: Vec<f64> = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q_low = quantile_sorted(&sorted, 0.025);
    let q_high = quantile_sorted(&sorted, 0.975);
    Ok((2.0 * theta_hat - q_high, 2.0 * theta_hat - q_low))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn auc_golden() {
        let value = auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap();
        assert!((value - 0.75).abs() < 1e-12, "{value}");
    }

    #[test]
    fn auc_endpoints_and_ties() {
        // perfectly separated
        let v = auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap();
        assert_eq!(v, 1.0);
        // anti-separated
        let v = auc(&[0.9, 0.8, 0.1, 0.2], &[0, 0, 1, 1]).unwrap();
        assert_eq!(v, 0.0);
        // all scores equal -> every pair a tie -> 0.5
        let v = auc(&[0.3, 0.3, 0.3, 0.3], &[0, 1, 0, 1]).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn auc_monotone_transform_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = 50;
            let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let labels: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
            let base = auc(&scores, &labels).unwrap();
            let squeezed: Vec<f64> = scores.iter().map(|s| (3.0 * s).tanh()).collect();
            let shifted: Vec<f64> = scores.iter().map(|s| 100.0 * s - 7.0).collect();
            assert!((auc(&squeezed, &labels).unwrap() - base).abs() < 1e-12);
            assert!((auc(&shifted, &labels).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_label_flip_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let n = 40;
            let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let labels: Vec<u32> = (0..n).map(|_| rng.random_range(0..2)).collect();
            if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l == 1) {
                continue;
            }
            let flipped: Vec<u32> = labels.iter().map(|&l| 1 - l).collect();
            let a = auc(&scores, &labels).unwrap();
            let b = auc(&scores, &flipped).unwrap();
            assert!((a + b - 1.0).abs() < 1e-12, "{a} + {b}");
        }
    }

    #[test]
    fn auc_errors() {
        assert!(auc(&[0.5], &[0, 1]).is_err()); // length mismatch
        assert!(auc(&[], &[]).is_err()); // empty
        assert!(auc(&[0.1, 0.2], &[0, 0]).is_err()); // single class
        assert!(auc(&[0.1, 0.2], &[0, 2]).is_err()); // non-binary label
        assert!(auc(&[f64::NAN, 0.2], &[0, 1]).is_err()); // non-finite
    }

    #[test]
    fn macro_f1_golden() {
        // per-class F1 = 0.5, 0.8, 2/3 -> mean 0.655556
        let truth = [0, 0, 1, 1, 2, 2];
        let pred = [0, 1, 1, 1, 2, 0];
        let v = macro_f1(&pred, &truth).unwrap();
        assert!((v - 0.6555555555).abs() < 1e-6, "{v}");
    }

    #[test]
    fn macro_f1_edges() {
        // pred == truth
        assert_eq!(macro_f1(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        // constant predictor on balanced binary: F1 = 2/3 and 0 -> 1/3
        let truth = [0, 0, 1, 1];
        let pred = [0, 0, 0, 0];
        let v = macro_f1(&pred, &truth).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12, "{v}");
        // class present only in pred still enters the average
        let v = macro_f1(&[0, 2], &[0, 1]).unwrap();
        // class 0: F1 1; class 1: 0; class 2: 0 -> 1/3
        assert!((v - 1.0 / 3.0).abs() < 1e-12, "{v}");
        assert!(macro_f1(&[0], &[0, 1]).is_err());
        assert!(macro_f1(&[], &[]).is_err());
    }

    #[test]
    fn macro_f1_class_permutation_invariance() {
        let truth = [0u32, 0, 1, 1, 2, 2, 0, 2];
        let pred = [0u32, 1, 1, 1, 2, 0, 0, 2];
        let base = macro_f1(&pred, &truth).unwrap();
        // apply permutation 0->2, 1->0, 2->1 jointly
        let perm = |v: &[u32]| -> Vec<u32> { v.iter().map(|&c| [2, 0, 1][c as usize]).collect() };
        let v = macro_f1(&perm(&pred), &perm(&truth)).unwrap();
        assert!((v - base).abs() < 1e-12);
    }

    #[test]
    fn accuracy_basics() {
        assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0], &[0, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn spearman_goldens() {
        let up = spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap();
        assert!((up - 1.0).abs() < 1e-12, "{up}");
        let down = spearman(&[1.0, 2.0, 3.0], &[5.0, 0.0, -5.0]).unwrap();
        assert!((down + 1.0).abs() < 1e-12, "{down}");
        // ranks [1,2,3,4] vs [1,3,2,4]: 1 - 6*2/(4*15) = 0.8
        let v = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((v - 0.8).abs() < 1e-12, "{v}");
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err()); // constant input
        assert!(spearman(&[1.0], &[1.0]).is_err()); // too short
    }

    #[test]
    fn spearman_handles_ties_with_average_ranks() {
        // x has a tie; average-rank convention gives a specific value.
        // ranks x = [1.5, 1.5, 3, 4], y = [1, 2, 3, 4]
        let v = spearman(&[5.0, 5.0, 7.0, 9.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        // Pearson on ranks: cov = 4.25... compute directly
        let rx = [1.5, 1.5, 3.0, 4.0];
        let ry = [1.0, 2.0, 3.0, 4.0];
        let m = 2.5;
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
        let vx: f64 = rx.iter().map(|a| (a - m) * (a - m)).sum();
        let vy: f64 = ry.iter().map(|b| (b - m) * (b - m)).sum();
        let expected = cov / (vx.sqrt() * vy.sqrt());
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_ci_pivots_around_estimate() {
        // replicates uniform around 0.5, estimate 0.5 -> CI nearly
        // symmetric and containing the estimate
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let reps: Vec<f64> = (0..1000).map(|_| 0.4 + 0.2 * rng.random::<f64>()).collect();
        let (low, high) = basic_bootstrap_ci(0.5, &reps).unwrap();
        assert!(low < 0.5 && 0.5 < high, "[{low}, {high}]");
        assert!(low > 0.39 && high < 0.61);
        // basic bootstrap reflects skew: replicates all above the estimate
        // produce an interval below it
        let reps: Vec<f64> = (0..1000).map(|_| 0.8 + 0.1 * rng.random::<f64>()).collect();
        let (low, high) = basic_bootstrap_ci(0.5, &reps).unwrap();
        assert!(high < 0.5, "[{low}, {high}]");
        assert!(basic_bootstrap_ci(0.5, &[0.1; 5]).is_err());
    }
}
