//! Shared fixtures for the benchmark suite: deterministic synthetic
//! inputs sized to exercise the hot paths without dominating wall time.

use attrisk_core::dataset::from_matrix;
use attrisk_core::{CategoricalSeries, Dataset, JointSpec};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Paired categorical draws from a mildly associated square joint.
pub fn associated_pair(cards: usize, n: usize, seed: u64) -> (CategoricalSeries, CategoricalSeries) {
    let base = 1.0 / (cards * cards) as f64;
    let boost = 0.5 / cards as f64;
    let probs: Vec<Vec<f64>> = (0..cards)
        .map(|i| {
            (0..cards)
                .map(|j| if i == j { base * 0.5 + boost } else { base * 0.5 })
                .collect()
        })
        .collect();
    let spec = JointSpec::new(probs).expect("valid joint");
    attrisk_core::sample_joint(&spec, n, seed).expect("sampling")
}

/// A numeric classification set: `informative` columns carry the binary
/// label through noise, the rest are distractors; one binary attribute
/// rides along for audit benchmarks.
pub fn tabular_dataset(n: usize, d: usize, informative: usize, seed: u64) -> Dataset {
    assert!(informative <= d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<u32> = (0..n).map(|_| u32::from(rng.random::<f64>() < 0.5)).collect();
    let attr: Vec<u32> = y
        .iter()
        .map(|&v| v ^ u32::from(rng.random::<f64>() < 0.25))
        .collect();
    let mut x = Array2::zeros((n, d));
    for j in 0..d {
        for i in 0..n {
            let signal = if j < informative {
                f64::from(y[i] ^ u32::from(rng.random::<f64>() < 0.2))
            } else {
                0.0
            };
            x[[i, j]] = signal + 0.5 * (rng.random::<f64>() - 0.5);
        }
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    from_matrix(
        x,
        names,
        vec![("site".into(), binary_series(&attr))],
        ("y".into(), binary_series(&y)),
    )
    .expect("valid dataset")
}

fn binary_series(bits: &[u32]) -> CategoricalSeries {
    CategoricalSeries::from_codes(bits.to_vec(), vec!["0".into(), "1".into()]).expect("binary codes")
}
