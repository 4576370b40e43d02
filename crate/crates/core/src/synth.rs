//! Seeded synthetic dataset generators with analytically known
//! information quantities — the validation oracles for the estimators and
//! for the causal-structure behaviors of conditioned detection.

use crate::dataset::{self, CategoricalSeries, Dataset, RawColumn};
use crate::error::{AuditError, Result};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h
}

pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn bern(rng: &mut ChaCha8Rng, p: f64) -> u32 {
    u32::from(rng.random::<f64>() < p)
}

fn binary_series(codes: Vec<u32>) -> CategoricalSeries {
    CategoricalSeries::from_codes(codes, vec!["0".into(), "1".into()])
        .expect("binary codes in range")
}

/// A fully specified joint distribution over two categorical variables.
/// Analytic quantities are derived from the probabilities, never supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    probabilities: Vec<Vec<f64>>,
}

impl JointSpec {
    pub fn new(probabilities: Vec<Vec<f64>>) -> Result<Self> {
        if probabilities.is_empty() || probabilities[0].is_empty() {
            return Err(AuditError::InvalidArgument(
                "joint distribution must have at least one row and column".into(),
            ));
        }
        let cols = probabilities[0].len();
        let mut total = 0.0;
        for row in &probabilities {
            if row.len() != cols {
                return Err(AuditError::InvalidArgument(
                    "joint distribution rows differ in length".into(),
                ));
            }
            for &p in row {
                if !p.is_finite() || p < 0.0 {
                    return Err(AuditError::InvalidArgument(format!(
                        "joint probability {p} is not a valid probability"
                    )));
                }
                total += p;
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(AuditError::InvalidArgument(format!(
                "joint probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn n_a(&self) -> usize {
        self.probabilities.len()
    }

    pub fn n_y(&self) -> usize {
        self.probabilities[0].len()
    }

    fn marginal_a(&self) -> Vec<f64> {
        self.probabilities.iter().map(|r| r.iter().sum()).collect()
    }

    fn marginal_y(&self) -> Vec<f64> {
        (0..self.n_y())
            .map(|j| self.probabilities.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn analytic_h_a(&self) -> f64 {
        dist_entropy(&self.marginal_a())
    }

    pub fn analytic_h_y(&self) -> f64 {
        dist_entropy(&self.marginal_y())
    }

    /// Exact MI of the joint, in nats.
    pub fn analytic_mi(&self) -> f64 {
        let pa = self.marginal_a();
        let py = self.marginal_y();
        let mut mi = 0.0;
        for (i, row) in self.probabilities.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    mi += p * (p / (pa[i] * py[j])).ln();
                }
            }
        }
        mi.max(0.0)
    }
}

fn dist_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// I.i.d. draws from a joint distribution.
pub fn sample_joint(spec: &JointSpec, n: usize, seed: u64) -> Result<(CategoricalSeries, CategoricalSeries)> {
    if n == 0 {
        return Err(AuditError::InvalidArgument("sample_joint: n must be ≥ 1".into()));
    }
    // flattened cumulative distribution for inverse-transform sampling
    let n_y = spec.n_y();
    let mut cumulative = Vec::with_capacity(spec.n_a() * n_y);
    let mut acc = 0.0;
    for row in &spec.probabilities {
        for &p in row {
            acc += p;
            cumulative.push(acc);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let cell = cumulative.partition_point(|&c| c < u).min(cumulative.len() - 1);
        a.push((cell / n_y) as u32);
        y.push((cell % n_y) as u32);
    }
    let names = |c: usize| (0..c).map(|i| i.to_string()).collect::<Vec<_>>();
    Ok((
        CategoricalSeries::from_codes(a, names(spec.n_a()))?,
        CategoricalSeries::from_codes(y, names(n_y))?,
    ))
}

/// A noisy observation channel: `copies` binary columns, each the source
/// flipped independently with `flip_probability`, plus `distractors`
/// columns of uniform noise. For a uniform binary source and one copy,
/// the analytic per-column MI is `ln 2 − H_b(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub flip_probability: f64,
    pub copies: usize,
    pub distractors: usize,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.flip_probability) {
            return Err(AuditError::InvalidArgument(format!(
                "flip probability {} outside [0, 0.5]",
                self.flip_probability
            )));
        }
        if self.copies == 0 {
            return Err(AuditError::InvalidArgument(
                "channel needs at least one copy column".into(),
            ));
        }
        Ok(())
    }

    /// MI between a uniform binary source and one noisy copy, in nats.
    pub fn analytic_mi_per_copy(&self) -> f64 {
        std::f64::consts::LN_2 - binary_entropy(self.flip_probability)
    }
}

/// Observe a binary series through a noise channel.
pub fn noise_features(a: &CategoricalSeries, ch: &ChannelSpec, seed: u64) -> Result<Array2<f64>> {
    ch.validate()?;
    if a.cardinality() != 2 {
        return Err(AuditError::InvalidArgument(format!(
            "noise channel source must be binary, got {} categories",
            a.cardinality()
        )));
    }
    let n = a.len();
    let d = ch.copies + ch.distractors;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((n, d));
    for j in 0..ch.copies {
        for (i, &code) in a.codes().iter().enumerate() {
            let flipped = code ^ bern(&mut rng, ch.flip_probability);
            x[[i, j]] = flipped as f64;
        }
    }
    for j in ch.copies..d {
        for i in 0..n {
            x[[i, j]] = rng.random();
        }
    }
    Ok(x)
}

/// Ground-truth information quantities recorded alongside generated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Joint {
        n: usize,
        seed: u64,
        analytic_mi: f64,
        analytic_h_a: f64,
        analytic_h_y: f64,
    },
    Channel {
        n: usize,
        seed: u64,
        flip_probability: f64,
        copies: usize,
        distractors: usize,
        analytic_mi_per_copy: f64,
    },
    Chain {
        n: usize,
        seed: u64,
        flip_a_to_y: f64,
        flip_y_to_x: f64,
        jitter_sd: f64,
        feature_copies: usize,
        analytic_mi_a_y: f64,
        /// within any fixed label value, features carry no information
        /// about the attribute — the conditioning target
        analytic_conditional_mi_a_x_given_y: f64,
    },
    Collider {
        n: usize,
        seed: u64,
        flip_label: f64,
        flip_z_to_x: f64,
        jitter_sd: f64,
        feature_copies: usize,
        /// attribute and features are marginally independent
        analytic_marginal_mi_a_x: f64,
        /// explaining-away dependence inside the Y=1 stratum
        analytic_mi_a_z_given_y1: f64,
    },
}

pub const CHAIN_FLIP_A_TO_Y: f64 = 0.12;
pub const CHAIN_FLIP_Y_TO_X: f64 = 0.05;
pub const COLLIDER_FLIP_LABEL: f64 = 0.1;
pub const FEATURE_JITTER_SD: f64 = 0.25;
pub const FEATURE_COPIES: usize = 3;

/// Continuous observation of a binary latent: the bit (possibly flipped)
/// plus Gaussian jitter. The jitter keeps surrogate decision boundaries
/// inside the data cloud even when the latent carries no signal about the
/// surrogate's target, so null-case predictions split near 50/50 instead
/// of collapsing onto one class.
fn jittered_copies(
    latent: &[u32],
    flip: f64,
    copies: usize,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let n = latent.len();
    let mut x = Array2::zeros((n, copies));
    for j in 0..copies {
        for (i, &bit) in latent.iter().enumerate() {
            let observed = bit ^ bern(rng, flip);
            x[[i, j]] = observed as f64 + FEATURE_JITTER_SD * standard_normal(rng);
        }
    }
    x
}

/// Chain structure A → Y → X: the attribute drives the label, the label
/// drives the features, and the features carry nothing about the
/// attribute beyond what the label explains. Conditioned detectability
/// must therefore vanish while unconditioned detectability stays high.
pub fn chain_dataset(n: usize, seed: u64) -> Result<Dataset> {
    if n < 100 {
        return Err(AuditError::InvalidArgument(format!(
            "chain dataset needs n ≥ 100, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<u32> = (0..n).map(|_| bern(&mut rng, 0.5)).collect();
    let y: Vec<u32> = a
        .iter()
        .map(|&ai| ai ^ bern(&mut rng, CHAIN_FLIP_A_TO_Y))
        .collect();
    let x = jittered_copies(&y, CHAIN_FLIP_Y_TO_X, FEATURE_COPIES, &mut rng);
    let names = (0..FEATURE_COPIES).map(|j| format!("x{j}")).collect();
    dataset::from_matrix(
        x,
        names,
        vec![("a".into(), binary_series(a))],
        ("y".into(), binary_series(y)),
    )
}

pub fn chain_ground_truth(n: usize, seed: u64) -> GroundTruth {
    GroundTruth::Chain {
        n,
        seed,
        flip_a_to_y: CHAIN_FLIP_A_TO_Y,
        flip_y_to_x: CHAIN_FLIP_Y_TO_X,
        jitter_sd: FEATURE_JITTER_SD,
        feature_copies: FEATURE_COPIES,
        analytic_mi_a_y: std::f64::consts::LN_2 - binary_entropy(CHAIN_FLIP_A_TO_Y),
        analytic_conditional_mi_a_x_given_y: 0.0,
    }
}

/// Collider structure X ← Z → Y ← A: the label combines the attribute
/// with an independent feature-driver Z (noisy OR), so the attribute and
/// the features are marginally independent — conditioning on the label
/// would manufacture an association (explaining away), unconditioned
/// detection must find none.
pub fn collider_dataset(n: usize, seed: u64) -> Result<Dataset> {
    if n < 100 {
        return Err(AuditError::InvalidArgument(format!(
            "collider dataset needs n ≥ 100, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<u32> = (0..n).map(|_| bern(&mut rng, 0.5)).collect();
    let z: Vec<u32> = (0..n).map(|_| bern(&mut rng, 0.5)).collect();
    let y: Vec<u32> = a
        .iter()
        .zip(&z)
        .map(|(&ai, &zi)| (ai | zi) ^ bern(&mut rng, COLLIDER_FLIP_LABEL))
        .collect();
    let x = jittered_copies(&z, CHAIN_FLIP_Y_TO_X, FEATURE_COPIES, &mut rng);
    let names = (0..FEATURE_COPIES).map(|j| format!("x{j}")).collect();
    dataset::from_matrix(
        x,
        names,
        vec![
            ("a".into(), binary_series(a)),
            ("z".into(), binary_series(z)),
        ],
        ("y".into(), binary_series(y)),
    )
}

/// Exact MI(A; Z | Y=1) for the collider's noisy-OR table.
pub fn collider_mi_a_z_given_y1() -> f64 {
    let e = COLLIDER_FLIP_LABEL;
    // joint over (A, Z) within the Y=1 stratum
    // P(Y=1 | A, Z): OR=0 only for (0,0) -> flipped to 1 w.p. e; else 1-e
    let p_y1 = [[e, 1.0 - e], [1.0 - e, 1.0 - e]];
    let mut joint = [[0.0f64; 2]; 2];
    let mut total = 0.0;
    for (ai, row) in p_y1.iter().enumerate() {
        for (zi, &p) in row.iter().enumerate() {
            joint[ai][zi] = 0.25 * p;
            total += joint[ai][zi];
        }
    }
    let mut pa = [0.0f64; 2];
    let mut pz = [0.0f64; 2];
    for ai in 0..2 {
        for zi in 0..2 {
            joint[ai][zi] /= total;
            pa[ai] += joint[ai][zi];
            pz[zi] += joint[ai][zi];
        }
    }
    let mut mi = 0.0;
    for ai in 0..2 {
        for zi in 0..2 {
            let p = joint[ai][zi];
            if p > 0.0 {
                mi += p * (p / (pa[ai] * pz[zi])).ln();
            }
        }
    }
    mi
}

pub fn collider_ground_truth(n: usize, seed: u64) -> GroundTruth {
    GroundTruth::Collider {
        n,
        seed,
        flip_label: COLLIDER_FLIP_LABEL,
        flip_z_to_x: CHAIN_FLIP_Y_TO_X,
        jitter_sd: FEATURE_JITTER_SD,
        feature_copies: FEATURE_COPIES,
        analytic_marginal_mi_a_x: 0.0,
        analytic_mi_a_z_given_y1: collider_mi_a_z_given_y1(),
    }
}

/// A dataset where every attribute is a noisy read of an independent
/// latent bit planted into one feature column: attribute k is observed
/// through flip probability `flips[k]`, so detectability spans 1 → 0
/// across attributes while all attributes stay independent of the label.
/// Two additional feature columns carry genuine label signal for the task
/// model. Returns the dataset and the planted flip probabilities.
pub fn planted_attribute_suite(n: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    if n < 100 {
        return Err(AuditError::InvalidArgument(format!(
            "attribute suite needs n ≥ 100, got {n}"
        )));
    }
    let flips = vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Vec<u32> = (0..n).map(|_| bern(&mut rng, 0.5)).collect();
    let k = flips.len();
    let d = k + 2;
    let mut x = Array2::zeros((n, d));
    let mut attributes = Vec::with_capacity(k);
    for (idx, &p) in flips.iter().enumerate() {
        let latent: Vec<u32> = (0..n).map(|_| bern(&mut rng, 0.5)).collect();
        for (i, &bit) in latent.iter().enumerate() {
            x[[i, idx]] = (bit ^ bern(&mut rng, p)) as f64;
        }
        attributes.push((format!("planted_{idx}"), binary_series(latent)));
    }
    // task signal: two noisy label copies
    for j in k..d {
        for (i, &bit) in y.iter().enumerate() {
            x[[i, j]] = (bit ^ bern(&mut rng, 0.1)) as f64
                + FEATURE_JITTER_SD * standard_normal(&mut rng);
        }
    }
    let names = (0..d).map(|j| format!("x{j}")).collect();
    let ds = dataset::from_matrix(x, names, attributes, ("y".into(), binary_series(y)))?;
    Ok((ds, flips))
}

/// A wide tabular dataset for scale testing: `n_features` raw columns
/// (mixed continuous/categorical), `n_attributes` attributes of varied
/// association with a latent driver, binary label. Returned unencoded so
/// ingestion-scale paths are exercised too.
pub fn wide_tabular(
    n_rows: usize,
    n_features: usize,
    n_attributes: usize,
    seed: u64,
) -> Result<Dataset> {
    if n_rows < 100 || n_features == 0 || n_attributes == 0 {
        return Err(AuditError::InvalidArgument(
            "wide_tabular: need n_rows ≥ 100 and at least one feature and attribute".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latent: Vec<u32> = (0..n_rows).map(|_| bern(&mut rng, 0.5)).collect();
    let y: Vec<u32> = latent
        .iter()
        .map(|&l| l ^ bern(&mut rng, 0.25))
        .collect();

    let categorical_count = n_features / 4;
    let continuous_count = n_features - categorical_count;
    let mut features: Vec<(String, RawColumn)> = Vec::with_capacity(n_features);
    for j in 0..continuous_count {
        // every third continuous column picks up latent signal
        let weight = match j % 3 {
            0 => 0.8,
            1 => 0.3,
            _ => 0.0,
        };
        let col: Vec<Option<f64>> = latent
            .iter()
            .map(|&l| Some(standard_normal(&mut rng) + weight * l as f64))
            .collect();
        features.push((format!("num_{j}"), RawColumn::Continuous(col)));
    }
    for j in 0..categorical_count {
        let shifted = j % 2 == 0;
        let col: Vec<Option<String>> = latent
            .iter()
            .map(|&l| {
                let bias = if shifted && l == 1 { 1 } else { 0 };
                let cat = (rng.random_range(0..3) + bias).min(3);
                Some(format!("c{cat}"))
            })
            .collect();
        features.push((format!("cat_{j}"), RawColumn::Categorical(col)));
    }

    let mut attributes: Vec<(String, RawColumn)> = Vec::with_capacity(n_attributes);
    for k in 0..n_attributes {
        match k % 3 {
            0 => {
                // binary, noisy read of the latent with varying fidelity
                let flip = 0.05 + 0.1 * (k / 3) as f64;
                let col: Vec<Option<String>> = latent
                    .iter()
                    .map(|&l| Some((l ^ bern(&mut rng, flip.min(0.5))).to_string()))
                    .collect();
                attributes.push((format!("attr_bin_{k}"), RawColumn::Categorical(col)));
            }
            1 => {
                // continuous, latent-shifted (discretized downstream)
                let col: Vec<Option<f64>> = latent
                    .iter()
                    .map(|&l| Some(standard_normal(&mut rng) + 0.6 * l as f64))
                    .collect();
                attributes.push((format!("attr_num_{k}"), RawColumn::Continuous(col)));
            }
            _ => {
                // categorical noise, 5 values, independent of everything
                let col: Vec<Option<String>> = (0..n_rows)
                    .map(|_| Some(format!("v{}", rng.random_range(0..5))))
                    .collect();
                attributes.push((format!("attr_cat_{k}"), RawColumn::Categorical(col)));
            }
        }
    }

    let label: Vec<Option<String>> = y.iter().map(|&v| Some(v.to_string())).collect();
    Dataset::from_columns(features, attributes, ("y".into(), RawColumn::Categorical(label)))
}
