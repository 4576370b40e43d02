//! Multinomial logistic regression trained by full-batch gradient descent
//! on a class-weighted softmax cross-entropy loss.

use super::{hash_f64s, softmax_rows, Standardizer};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LogisticParams {
    scaler: Standardizer,
    /// weights, C×D
    w: Array2<f64>,
    /// biases, C
    b: Array1<f64>,
}

/// Full-batch gradient descent from zero initialization on standardized
/// features. Deterministic without randomness: the loss is convex and the
/// trajectory is fixed by the data.
pub(crate) fn fit(
    hyper: &LogisticHyper,
    x: ArrayView2<f64>,
    y: &[u32],
    class_count: usize,
    class_weights: &[f64],
) -> LogisticParams {
    let scaler = Standardizer::fit(x);
    let xs = scaler.transform(x);
    let d = xs.ncols();
    let c = class_count;
    let mut w: Array2<f64> = Array2::zeros((c, d));
    let mut b: Array1<f64> = Array1::zeros(c);

    // per-row loss weights, normalized to sum 1
    let total: f64 = y.iter().map(|&t| class_weights[t as usize]).sum();
    let row_w: Vec<f64> = y
        .iter()
        .map(|&t| class_weights[t as usize] / total)
        .collect();

    for _ in 0..hyper.epochs {
        // P = softmax(Xs·Wᵀ + b), row-wise
        let mut p = xs.dot(&w.t());
        for mut row in p.rows_mut() {
            row += &b;
        }
        softmax_rows(&mut p);
        // G[i] = row_w[i]·(p_i − onehot(y_i))
        for (i, mut row) in p.rows_mut().into_iter().enumerate() {
            row *= row_w[i];
            row[y[i] as usize] -= row_w[i];
        }
        let grad_w = p.t().dot(&xs) + &(hyper.l2 * &w);
        let grad_b = p.sum_axis(Axis(0));
        w.scaled_add(-hyper.learning_rate, &grad_w);
        b.scaled_add(-hyper.learning_rate, &grad_b);
    }
    LogisticParams { scaler, w, b }
}

impl LogisticParams {
    pub(crate) fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let xs = self.scaler.transform(x);
        let mut z = xs.dot(&self.w.t());
        for mut row in z.rows_mut() {
            row += &self.b;
        }
        softmax_rows(&mut z);
        z
    }

    pub(crate) fn hash_into(&self, hasher: &mut Sha256) {
        hash_f64s(hasher, self.scaler_values());
        hash_f64s(hasher, self.w.iter().copied());
        hash_f64s(hasher, self.b.iter().copied());
    }

    fn scaler_values(&self) -> impl Iterator<Item = f64> + '_ {
        let Standardizer { mean, scale } = &self.scaler;
        mean.iter().copied().chain(scale.iter().copied())
    }
}

/// Test fixture: a binary model scoring class 1 as `w·x + b` on raw
/// (unstandardized) inputs.
#[cfg(test)]
pub(crate) fn manual_binary_for_tests(w1: Array1<f64>, b1: f64) -> super::FittedModel {
    let d = w1.len();
    let mut w = Array2::zeros((2, d));
    w.row_mut(1).assign(&w1);
    let params = LogisticParams {
        scaler: Standardizer::identity(d),
        w,
        b: ndarray::arr1(&[0.0, b1]),
    };
    super::FittedModel {
        spec: super::PredictorSpec::with_defaults(super::ModelFamily::LogisticRegression, 0),
        class_count: 2,
        feature_count: d,
        present: vec![true, true],
        params: super::Params::Logistic(params),
    }
}
