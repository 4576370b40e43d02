//! Naive Bayes with uniform class priors: Gaussian likelihoods for
//! continuous columns, Laplace-smoothed categorical likelihoods for
//! one-hot groups.
//!
//! Uniform priors are the family's form of class balancing — posterior
//! odds come from likelihoods alone, never from the target's base rate.
//! Per-class moments are accumulated over value-sorted samples so fits
//! are bit-exact under any permutation of the training rows.

use super::hash_f64s;
use crate::dataset::{FeatureBlock, FeatureMeta};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use std::ops::Range;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BayesHyper {
    /// variance floor, as a fraction of the largest per-column variance
    pub var_smoothing: f64,
    /// additive smoothing for categorical counts
    pub laplace: f64,
}

impl Default for BayesHyper {
    fn default() -> Self {
        Self {
            var_smoothing: 1e-9,
            laplace: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BlockParams {
    Gaussian {
        col: usize,
        /// per-class mean and variance, length C
        mean: Vec<f64>,
        var: Vec<f64>,
    },
    Categorical {
        cols: Range<usize>,
        /// log P(category | class), C × group-width
        log_prob: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BayesParams {
    blocks: Vec<BlockParams>,
    /// ln(1/k) for the k present classes, −∞ for absent ones
    log_prior: Vec<f64>,
}

fn sorted_sum(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

pub(crate) fn fit(
    hyper: &BayesHyper,
    x: ArrayView2<f64>,
    y: &[u32],
    class_count: usize,
    meta: &FeatureMeta,
    empirical_priors: bool,
) -> BayesParams {
    let n = x.nrows();
    let mut class_n = vec![0usize; class_count];
    for &c in y {
        class_n[c as usize] += 1;
    }
    let present = class_n.iter().filter(|&&c| c > 0).count();
    let log_prior: Vec<f64> = class_n
        .iter()
        .map(|&c| {
            if c == 0 {
                f64::NEG_INFINITY
            } else if empirical_priors {
                (c as f64 / n as f64).ln()
            } else {
                -(present as f64).ln()
            }
        })
        .collect();

    // variance floor relative to the largest overall column variance
    let mut max_var = 0.0f64;
    for j in 0..x.ncols() {
        let mut vals: Vec<f64> = x.column(j).to_vec();
        let mean = sorted_sum(&mut vals) / n as f64;
        let mut sq: Vec<f64> = vals.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = sorted_sum(&mut sq) / n as f64;
        max_var = max_var.max(var);
    }
    let floor = hyper.var_smoothing * if max_var > 0.0 { max_var } else { 1.0 };

    let blocks = meta
        .blocks
        .iter()
        .map(|block| match block {
            FeatureBlock::Continuous { col } => {
                let mut mean = vec![0.0; class_count];
                let mut var = vec![floor; class_count];
                for c in 0..class_count {
                    if class_n[c] == 0 {
                        continue;
                    }
                    let mut vals: Vec<f64> = y
                        .iter()
                        .enumerate()
                        .filter(|(_, &t)| t as usize == c)
                        .map(|(i, _)| x[[i, *col]])
                        .collect();
                    let m = sorted_sum(&mut vals) / class_n[c] as f64;
                    let mut sq: Vec<f64> = vals.iter().map(|v| (v - m) * (v - m)).collect();
                    mean[c] = m;
                    var[c] = sorted_sum(&mut sq) / class_n[c] as f64 + floor;
                }
                BlockParams::Gaussian {
                    col: *col,
                    mean,
                    var,
                }
            }
            FeatureBlock::OneHot { cols } => {
                let g = cols.len();
                let mut counts = vec![vec![0u64; g]; class_count];
                for (i, &t) in y.iter().enumerate() {
                    let cat = one_hot_category(x, i, cols);
                    counts[t as usize][cat] += 1;
                }
                let log_prob = counts
                    .iter()
                    .zip(&class_n)
                    .map(|(row, &nc)| {
                        row.iter()
                            .map(|&cnt| {
                                let num = cnt as f64 + hyper.laplace;
                                let den = nc as f64 + hyper.laplace * g as f64;
                                (num / den).ln()
                            })
                            .collect()
                    })
                    .collect();
                BlockParams::Categorical {
                    cols: cols.clone(),
                    log_prob,
                }
            }
        })
        .collect();
    BayesParams { blocks, log_prior }
}

/// The active category of a one-hot group: index of the group's largest
/// entry (exactly one entry is 1 in well-formed encodings; argmax keeps
/// the mapping total on arbitrary numeric input).
fn one_hot_category(x: ArrayView2<f64>, row: usize, cols: &Range<usize>) -> usize {
    let mut best = cols.start;
    for j in cols.clone() {
        if x[[row, j]] > x[[row, best]] {
            best = j;
        }
    }
    best - cols.start
}

impl BayesParams {
    pub(crate) fn predict_proba(&self, x: ArrayView2<f64>, class_count: usize) -> Array2<f64> {
        let n = x.nrows();
        let mut out = Array2::zeros((n, class_count));
        let mut scores = vec![0.0f64; class_count];
        for i in 0..n {
            scores.copy_from_slice(&self.log_prior);
            for block in &self.blocks {
                match block {
                    BlockParams::Gaussian { col, mean, var } => {
                        let v = x[[i, *col]];
                        for (c, s) in scores.iter_mut().enumerate() {
                            if s.is_finite() {
                                let d = v - mean[c];
                                *s += -0.5 * (std::f64::consts::TAU * var[c]).ln()
                                    - d * d / (2.0 * var[c]);
                            }
                        }
                    }
                    BlockParams::Categorical { cols, log_prob } => {
                        let cat = one_hot_category(x, i, cols);
                        for (c, s) in scores.iter_mut().enumerate() {
                            if s.is_finite() {
                                *s += log_prob[c][cat];
                            }
                        }
                    }
                }
            }
            // normalize in log space: softmax over finite scores
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for &s in &scores {
                if s.is_finite() {
                    total += (s - max).exp();
                }
            }
            for (c, &s) in scores.iter().enumerate() {
                out[[i, c]] = if s.is_finite() {
                    (s - max).exp() / total
                } else {
                    0.0
                };
            }
        }
        out
    }

    pub(crate) fn hash_into(&self, hasher: &mut Sha256) {
        use sha2::Digest;
        hash_f64s(hasher, self.log_prior.iter().copied());
        for block in &self.blocks {
            match block {
                BlockParams::Gaussian { col, mean, var } => {
                    hasher.update([0u8]);
                    hasher.update(col.to_le_bytes());
                    hash_f64s(hasher, mean.iter().copied());
                    hash_f64s(hasher, var.iter().copied());
                }
                BlockParams::Categorical { cols, log_prob } => {
                    hasher.update([1u8]);
                    hasher.update(cols.start.to_le_bytes());
                    hasher.update(cols.end.to_le_bytes());
                    for row in log_prob {
                        hash_f64s(hasher, row.iter().copied());
                    }
                }
            }
        }
    }
}
