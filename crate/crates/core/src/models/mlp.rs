//! One-hidden-layer tanh MLP trained by minibatch gradient descent on a
//! class-weighted softmax cross-entropy loss; exposes the post-activation
//! hidden layer as its representation.

use super::{hash_f64s, softmax_rows, Standardizer};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpHyper {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpHyper {
    fn default() -> Self {
        Self {
            hidden: 64,
            learning_rate: 0.01,
            epochs: 30,
            batch_size: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MlpParams {
    scaler: Standardizer,
    /// hidden weights, H×D
    w1: Array2<f64>,
    /// hidden biases, H
    b1: Array1<f64>,
    /// output weights, C×H
    w2: Array2<f64>,
    /// output biases, C
    b2: Array1<f64>,
}

/// Weight bundle during training; gradients use the same shape.
pub(crate) struct Layers {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Class-weighted cross-entropy loss and its gradients on one batch.
/// `row_w` are per-row loss weights (normalized by the caller).
pub(crate) fn loss_and_grads(
    layers: &Layers,
    xs: ArrayView2<f64>,
    y: &[u32],
    row_w: &[f64],
) -> (f64, Layers) {
    // forward
    let mut h = xs.dot(&layers.w1.t());
    for mut row in h.rows_mut() {
        row += &layers.b1;
    }
    h.mapv_inplace(f64::tanh);
    let mut p = h.dot(&layers.w2.t());
    for mut row in p.rows_mut() {
        row += &layers.b2;
    }
    softmax_rows(&mut p);

    let mut loss = 0.0;
    for (i, &t) in y.iter().enumerate() {
        loss -= row_w[i] * p[[i, t as usize]].max(1e-300).ln();
    }

    // backward: dZ = row_w ⊙ (P − onehot)
    for (i, mut row) in p.rows_mut().into_iter().enumerate() {
        row *= row_w[i];
        row[y[i] as usize] -= row_w[i];
    }
    let dz = p;
    let g_w2 = dz.t().dot(&h);
    let g_b2 = dz.sum_axis(Axis(0));
    // dH = (dZ·W2) ⊙ (1 − H²)
    let mut dh = dz.dot(&layers.w2);
    dh.zip_mut_with(&h, |d, &hv| *d *= 1.0 - hv * hv);
    let g_w1 = dh.t().dot(&xs);
    let g_b1 = dh.sum_axis(Axis(0));

    (
        loss,
        Layers {
            w1: g_w1,
            b1: g_b1,
            w2: g_w2,
            b2: g_b2,
        },
    )
}

pub(crate) fn fit(
    hyper: &MlpHyper,
    x: ArrayView2<f64>,
    y: &[u32],
    class_count: usize,
    class_weights: &[f64],
    seed: u64,
) -> MlpParams {
    let scaler = Standardizer::fit(x);
    let xs = scaler.transform(x);
    let n = xs.nrows();
    let d = xs.ncols();
    let hsize = hyper.hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // uniform ±1/√fan_in init, biases zero
    let bound1 = 1.0 / (d.max(1) as f64).sqrt();
    let bound2 = 1.0 / (hsize as f64).sqrt();
    let mut layers = Layers {
        w1: Array2::from_shape_fn((hsize, d), |_| rng.random_range(-bound1..bound1)),
        b1: Array1::zeros(hsize),
        w2: Array2::from_shape_fn((class_count, hsize), |_| rng.random_range(-bound2..bound2)),
        b2: Array1::zeros(class_count),
    };

    // Normalize row weights to mean 1 over the whole training set, then
    // divide each batch by its size. Every batch is then an unbiased
    // estimate of the balanced full-data gradient; renormalizing within
    // the batch instead would couple a row's step size to its batch-mates
    // and systematically dilute minority-class mass on skewed data.
    let mut row_weight: Vec<f64> = y.iter().map(|&t| class_weights[t as usize]).collect();
    let mean_w = row_weight.iter().sum::<f64>() / n as f64;
    if mean_w > 0.0 {
        for w in &mut row_weight {
            *w /= mean_w;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut batch_x = Array2::zeros((hyper.batch_size.min(n), d));
    let mut batch_y = Vec::with_capacity(hyper.batch_size);
    let mut batch_w = Vec::with_capacity(hyper.batch_size);

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(hyper.batch_size) {
            let b = chunk.len();
            batch_y.clear();
            batch_w.clear();
            for (bi, &i) in chunk.iter().enumerate() {
                batch_x.row_mut(bi).assign(&xs.row(i));
                batch_y.push(y[i]);
                batch_w.push(row_weight[i] / b as f64);
            }
            let view = batch_x.slice(ndarray::s![..b, ..]);
            let (_, grads) = loss_and_grads(&layers, view, &batch_y, &batch_w);
            layers.w1.scaled_add(-hyper.learning_rate, &grads.w1);
            layers.b1.scaled_add(-hyper.learning_rate, &grads.b1);
            layers.w2.scaled_add(-hyper.learning_rate, &grads.w2);
            layers.b2.scaled_add(-hyper.learning_rate, &grads.b2);
        }
    }
    MlpParams {
        scaler,
        w1: layers.w1,
        b1: layers.b1,
        w2: layers.w2,
        b2: layers.b2,
    }
}

impl MlpParams {
    pub(crate) fn representation(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let xs = self.scaler.transform(x);
        let mut h = xs.dot(&self.w1.t());
        for mut row in h.rows_mut() {
            row += &self.b1;
        }
        h.mapv_inplace(f64::tanh);
        h
    }

    pub(crate) fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let h = self.representation(x);
        let mut z = h.dot(&self.w2.t());
        for mut row in z.rows_mut() {
            row += &self.b2;
        }
        softmax_rows(&mut z);
        z
    }

    /// Apply the final layer to an externally supplied representation —
    /// must agree with `predict_proba` on the same inputs.
    #[cfg(test)]
    pub(crate) fn recompose_for_tests(&self, representation: &Array2<f64>) -> Array2<f64> {
        let mut z = representation.dot(&self.w2.t());
        for mut row in z.rows_mut() {
            row += &self.b2;
        }
        softmax_rows(&mut z);
        z
    }

    pub(crate) fn hash_into(&self, hasher: &mut Sha256) {
        let Standardizer { mean, scale } = &self.scaler;
        hash_f64s(hasher, mean.iter().copied());
        hash_f64s(hasher, scale.iter().copied());
        hash_f64s(hasher, self.w1.iter().copied());
        hash_f64s(hasher, self.b1.iter().copied());
        hash_f64s(hasher, self.w2.iter().copied());
        hash_f64s(hasher, self.b2.iter().copied());
    }
}

/// Test fixture: random hidden layer, all-zero output layer — softmax of
/// zeros must be uniform.
#[cfg(test)]
pub(crate) fn zeroed_head_for_tests(classes: usize, d: usize, hidden: usize) -> super::FittedModel {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = MlpParams {
        scaler: Standardizer::identity(d),
        w1: Array2::from_shape_fn((hidden, d), |_| rng.random_range(-1.0..1.0)),
        b1: Array1::zeros(hidden),
        w2: Array2::zeros((classes, hidden)),
        b2: Array1::zeros(classes),
    };
    super::FittedModel {
        spec: super::PredictorSpec::with_defaults(super::ModelFamily::Mlp, 1),
        class_count: classes,
        feature_count: d,
        present: vec![true; classes],
        params: super::Params::Mlp(params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Analytic gradients match central finite differences of the loss.
    #[test]
    fn gradient_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = 10;
        let d = 3;
        let hsize = 5;
        let c = 3;
        let xs = Array2::from_shape_fn((b, d), |_| rng.random_range(-1.0..1.0));
        let y: Vec<u32> = (0..b).map(|_| rng.random_range(0..c as u32)).collect();
        let row_w: Vec<f64> = vec![1.0 / b as f64; b];
        let layers = Layers {
            w1: Array2::from_shape_fn((hsize, d), |_| rng.random_range(-0.5..0.5)),
            b1: Array1::from_shape_fn(hsize, |_| rng.random_range(-0.5..0.5)),
            w2: Array2::from_shape_fn((c, hsize), |_| rng.random_range(-0.5..0.5)),
            b2: Array1::from_shape_fn(c, |_| rng.random_range(-0.5..0.5)),
        };
        let (_, grads) = loss_and_grads(&layers, xs.view(), &y, &row_w);

        let eps = 1e-6;
        let loss_at = |l: &Layers| loss_and_grads(l, xs.view(), &y, &row_w).0;
        let check = |analytic: f64, plus: Layers, minus: Layers, what: &str| {
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * eps);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            let rel = (analytic - numeric).abs() / denom;
            assert!(rel < 1e-4, "{what}: analytic {analytic} vs numeric {numeric}");
        };

        let perturb = |sign: f64, which: usize, idx: (usize, usize)| -> Layers {
            let mut l = Layers {
                w1: layers.w1.clone(),
                b1: layers.b1.clone(),
                w2: layers.w2.clone(),
                b2: layers.b2.clone(),
            };
            match which {
                0 => l.w1[[idx.0, idx.1]] += sign * eps,
                1 => l.b1[idx.0] += sign * eps,
                2 => l.w2[[idx.0, idx.1]] += sign * eps,
                _ => l.b2[idx.0] += sign * eps,
            }
            l
        };

        for i in 0..hsize {
            for j in 0..d {
                check(
                    grads.w1[[i, j]],
                    perturb(1.0, 0, (i, j)),
                    perturb(-1.0, 0, (i, j)),
                    "w1",
                );
            }
            check(grads.b1[i], perturb(1.0, 1, (i, 0)), perturb(-1.0, 1, (i, 0)), "b1");
        }
        for i in 0..c {
            for j in 0..hsize {
                check(
                    grads.w2[[i, j]],
                    perturb(1.0, 2, (i, j)),
                    perturb(-1.0, 2, (i, j)),
                    "w2",
                );
            }
            check(grads.b2[i], perturb(1.0, 3, (i, 0)), perturb(-1.0, 3, (i, 0)), "b2");
        }
    }
}
