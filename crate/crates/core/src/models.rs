//! A small, self-contained model zoo behind one predictor abstraction.
//!
//! Four families — multinomial logistic regression, a CART decision tree,
//! naive Bayes, and a one-hidden-layer MLP — cover a spread of model
//! complexity for surrogate attribute prediction and task modeling. All
//! families train with inverse-frequency class balancing so that a
//! surrogate facing a skewed target cannot score by predicting the
//! majority class (which would leak the target's base rate into
//! aggregated predictions). The MLP additionally exposes its
//! post-activation hidden layer for representation probing.
//!
//! Every fit is deterministic given `(spec, x, y)`: stochastic steps draw
//! from a ChaCha stream seeded by `spec.seed`, and tree/naive-Bayes fits
//! are additionally invariant to training-row order.

mod bayes;
mod linear;
mod mlp;
mod tree;

use crate::dataset::{FeatureBlock, FeatureMeta};
use crate::error::{AuditError, Result};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use bayes::BayesHyper;
pub use linear::LogisticHyper;
pub use mlp::MlpHyper;
pub use tree::TreeHyper;

/// The available model families, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    LogisticRegression,
    DecisionTree,
    NaiveBayes,
    Mlp,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 4] = [
        ModelFamily::LogisticRegression,
        ModelFamily::DecisionTree,
        ModelFamily::NaiveBayes,
        ModelFamily::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::LogisticRegression => "logistic_regression",
            ModelFamily::DecisionTree => "decision_tree",
            ModelFamily::NaiveBayes => "naive_bayes",
            ModelFamily::Mlp => "mlp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Family-specific hyperparameters (complete — defaults are filled at
/// construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilyHyper {
    LogisticRegression(LogisticHyper),
    DecisionTree(TreeHyper),
    NaiveBayes(BayesHyper),
    Mlp(MlpHyper),
}

/// A fully specified predictor: family, hyperparameters, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorSpec {
    pub hyper: FamilyHyper,
    pub seed: u64,
}

impl PredictorSpec {
    /// Default hyperparameters for a family.
    pub fn with_defaults(family: ModelFamily, seed: u64) -> Self {
        let hyper = match family {
            ModelFamily::LogisticRegression => {
                FamilyHyper::LogisticRegression(LogisticHyper::default())
            }
            ModelFamily::DecisionTree => FamilyHyper::DecisionTree(TreeHyper::default()),
            ModelFamily::NaiveBayes => FamilyHyper::NaiveBayes(BayesHyper::default()),
            ModelFamily::Mlp => FamilyHyper::Mlp(MlpHyper::default()),
        };
        Self { hyper, seed }
    }

    pub fn family(&self) -> ModelFamily {
        match self.hyper {
            FamilyHyper::LogisticRegression(_) => ModelFamily::LogisticRegression,
            FamilyHyper::DecisionTree(_) => ModelFamily::DecisionTree,
            FamilyHyper::NaiveBayes(_) => ModelFamily::NaiveBayes,
            FamilyHyper::Mlp(_) => ModelFamily::Mlp,
        }
    }

    /// The same spec under a different seed (per-fold reseeding).
    pub fn reseeded(&self, seed: u64) -> Self {
        Self {
            hyper: self.hyper.clone(),
            seed,
        }
    }
}

/// Per-column standardization parameters learned on the training split.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Standardizer {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Standardizer {
    /// Column means and standard deviations; zero-variance columns get
    /// scale 1 (they become identically 0 after centering).
    pub(crate) fn fit(x: ArrayView2<f64>) -> Self {
        let n = x.nrows() as f64;
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let mut scale = Array1::zeros(x.ncols());
        for j in 0..x.ncols() {
            let m = mean[j];
            let var: f64 = x.column(j).iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
            scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Self { mean, scale }
    }

    #[cfg(test)]
    pub(crate) fn identity(d: usize) -> Self {
        Self {
            mean: Array1::zeros(d),
            scale: Array1::ones(d),
        }
    }

    pub(crate) fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            row -= &self.mean;
            row /= &self.scale;
        }
        out
    }
}

/// How training rows are weighted across classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Weighting {
    /// Inverse-frequency class weights (naive Bayes: uniform priors).
    /// The default everywhere a skewed target must not pull predictions
    /// toward its majority class.
    Balanced,
    /// Every row weighs the same (naive Bayes: empirical priors) — plain
    /// empirical risk, used by the representation probe where collapsing
    /// to the majority class on signal-free data is the intended
    /// chance-level behavior.
    Uniform,
}

/// Inverse-frequency class weights: `w_c = n / (k_present · n_c)` for
/// classes with support, 0 otherwise. Weighted class masses then agree
/// across present classes, so balanced training is the default everywhere.
pub(crate) fn class_weights(y: &[u32], class_count: usize) -> Vec<f64> {
    let mut counts = vec![0u64; class_count];
    for &c in y {
        counts[c as usize] += 1;
    }
    let present = counts.iter().filter(|&&c| c > 0).count();
    counts
        .iter()
        .map(|&c| {
            if c > 0 {
                y.len() as f64 / (present as f64 * c as f64)
            } else {
                0.0
            }
        })
        .collect()
}

/// Row-wise softmax in place, numerically stabilized.
pub(crate) fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Index of the row maximum, ties resolved toward the lowest index.
pub(crate) fn argmax_lowest<I: IntoIterator<Item = f64>>(row: I) -> u32 {
    let mut best = 0usize;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in row.into_iter().enumerate() {
        if v > best_value {
            best_value = v;
            best = i;
        }
    }
    best as u32
}

#[derive(Debug, Clone, PartialEq)]
enum Params {
    Logistic(linear::LogisticParams),
    Tree(tree::TreeParams),
    Bayes(bayes::BayesParams),
    Mlp(mlp::MlpParams),
}

/// A trained model: family parameters plus the class bookkeeping shared
/// by all families.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    spec: PredictorSpec,
    class_count: usize,
    feature_count: usize,
    /// classes with at least one training example; absent classes keep
    /// zero probability mass in every prediction
    present: Vec<bool>,
    params: Params,
}

/// Train a model of the given spec on `(x, y)`.
///
/// `class_count` declares the full class set (a training split may lack
/// some classes; they stay representable with zero probability).
/// `meta` describes the matrix's column structure; only naive Bayes
/// distinguishes continuous columns from one-hot groups, the other
/// families treat all columns numerically.
pub fn fit(
    spec: &PredictorSpec,
    x: ArrayView2<f64>,
    y: &[u32],
    class_count: usize,
    meta: &FeatureMeta,
) -> Result<FittedModel> {
    fit_weighted(spec, x, y, class_count, meta, Weighting::Balanced)
}

/// [`fit`] with an explicit class-weighting policy.
pub(crate) fn fit_weighted(
    spec: &PredictorSpec,
    x: ArrayView2<f64>,
    y: &[u32],
    class_count: usize,
    meta: &FeatureMeta,
    weighting: Weighting,
) -> Result<FittedModel> {
    let n = x.nrows();
    let d = x.ncols();
    if n == 0 {
        return Err(AuditError::InsufficientData("fit: no training rows".into()));
    }
    if y.len() != n {
        return Err(AuditError::InvalidArgument(format!(
            "fit: {} rows vs {} targets",
            n,
            y.len()
        )));
    }
    if class_count == 0 {
        return Err(AuditError::InvalidArgument(
            "fit: class_count must be at least 1".into(),
        ));
    }
    if class_count > n {
        return Err(AuditError::InsufficientData(format!(
            "fit: {class_count} classes exceed {n} training rows"
        )));
    }
    if let Some(&bad) = y.iter().find(|&&c| c as usize >= class_count) {
        return Err(AuditError::InvalidArgument(format!(
            "fit: target code {bad} out of range for {class_count} classes"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(AuditError::InvalidArgument(
            "fit: non-finite feature value".into(),
        ));
    }
    validate_meta(meta, d)?;

    let weights = match weighting {
        Weighting::Balanced => class_weights(y, class_count),
        Weighting::Uniform => vec![1.0; class_count],
    };
    let empirical_priors = weighting == Weighting::Uniform;
    let mut present = vec![false; class_count];
    for &c in y {
        present[c as usize] = true;
    }

    let params = match &spec.hyper {
        FamilyHyper::LogisticRegression(h) => {
            Params::Logistic(linear::fit(h, x, y, class_count, &weights))
        }
        FamilyHyper::DecisionTree(h) => Params::Tree(tree::fit(h, x, y, class_count, &weights)),
        FamilyHyper::NaiveBayes(h) => {
            Params::Bayes(bayes::fit(h, x, y, class_count, meta, empirical_priors))
        }
        FamilyHyper::Mlp(h) => Params::Mlp(mlp::fit(h, x, y, class_count, &weights, spec.seed)),
    };
    Ok(FittedModel {
        spec: spec.clone(),
        class_count,
        feature_count: d,
        present,
        params,
    })
}

fn validate_meta(meta: &FeatureMeta, d: usize) -> Result<()> {
    let mut covered = vec![false; d];
    for block in &meta.blocks {
        let range = match block {
            FeatureBlock::Continuous { col } => *col..*col + 1,
            FeatureBlock::OneHot { cols } => cols.clone(),
        };
        for j in range {
            if j >= d {
                return Err(AuditError::InvalidArgument(format!(
                    "feature meta references column {j} of a {d}-column matrix"
                )));
            }
            if covered[j] {
                return Err(AuditError::InvalidArgument(format!(
                    "feature meta covers column {j} twice"
                )));
            }
            covered[j] = true;
        }
    }
    if let Some(j) = covered.iter().position(|&c| !c) {
        return Err(AuditError::InvalidArgument(format!(
            "feature meta leaves column {j} uncovered"
        )));
    }
    Ok(())
}

impl FittedModel {
    pub fn family(&self) -> ModelFamily {
        self.spec.family()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn has_representation(&self) -> bool {
        matches!(self.params, Params::Mlp(_))
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.feature_count {
            return Err(AuditError::InvalidArgument(format!(
                "predict: {} columns, model trained on {}",
                x.ncols(),
                self.feature_count
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AuditError::InvalidArgument(
                "predict: non-finite feature value".into(),
            ));
        }
        Ok(())
    }

    /// Class-probability matrix, one row per input row; rows sum to 1 and
    /// classes absent from training have exactly zero mass.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut proba = match &self.params {
            Params::Logistic(p) => p.predict_proba(x),
            Params::Tree(p) => p.predict_proba(x, self.class_count),
            Params::Bayes(p) => p.predict_proba(x, self.class_count),
            Params::Mlp(p) => p.predict_proba(x),
        };
        if self.present.iter().any(|&p| !p) {
            for mut row in proba.rows_mut() {
                let mut sum = 0.0;
                for (c, v) in row.iter_mut().enumerate() {
                    if !self.present[c] {
                        *v = 0.0;
                    }
                    sum += *v;
                }
                if sum > 0.0 {
                    for v in row.iter_mut() {
                        *v /= sum;
                    }
                } else {
                    // degenerate: spread uniformly over present classes
                    let k = self.present.iter().filter(|&&p| p).count() as f64;
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = if self.present[c] { 1.0 / k } else { 0.0 };
                    }
                }
            }
        }
        Ok(proba)
    }

    /// Hard class predictions: row-wise argmax of [`predict_proba`], ties
    /// toward the lowest class code.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<u32>> {
        let proba = self.predict_proba(x)?;
        Ok(proba
            .rows()
            .into_iter()
            .map(|row| argmax_lowest(row.iter().copied()))
            .collect())
    }

    /// Penultimate (post-activation hidden layer) representation; only
    /// the MLP family supports this.
    pub fn representation(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        match &self.params {
            Params::Mlp(p) => Ok(p.representation(x)),
            _ => Err(AuditError::Model(format!(
                "{} has no intermediate representation",
                self.family()
            ))),
        }
    }

    /// Content hash of every learned parameter; changes iff the model's
    /// parameters change (used to assert a frozen model stays frozen).
    pub fn param_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.family().name().as_bytes());
        hasher.update(self.class_count.to_le_bytes());
        hasher.update(self.feature_count.to_le_bytes());
        for &p in &self.present {
            hasher.update([u8::from(p)]);
        }
        match &self.params {
            Params::Logistic(p) => p.hash_into(&mut hasher),
            Params::Tree(p) => p.hash_into(&mut hasher),
            Params::Bayes(p) => p.hash_into(&mut hasher),
            Params::Mlp(p) => p.hash_into(&mut hasher),
        }
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub(crate) fn hash_f64s(hasher: &mut Sha256, values: impl IntoIterator<Item = f64>) {
    for v in values {
        hasher.update(v.to_le_bytes());
    }
}
