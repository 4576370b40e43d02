//! Synthetic-shortcut calibration: plant a fully detectable binary
//! attribute at a controlled level of label association, train a task
//! model with the artifact in place, and measure how much of its test
//! performance evaporates when the artifact is anti-correlated with the
//! label. The resulting curve bounds the task-performance risk carried
//! by a real attribute at the same association strength.

use crate::audit::{plan_folds, prepare_label, score_pair};
use crate::dataset::{CategoricalSeries, Dataset, DatasetFingerprint, RawColumn};
use crate::error::{AuditError, Result};
use crate::info::{AmiScore, Normalization};
use crate::metrics::auc;
use crate::models::{fit, ModelFamily, PredictorSpec};
use crate::seeding::derive_seed;
use ndarray::{Array2, ArrayView2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Name of the planted feature column. A dataset that already has a
/// column by this name cannot be calibrated (the injection would be
/// ambiguous) and is rejected up front.
pub const ARTIFACT_COLUMN: &str = "artifact";

/// What the planted column encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactMode {
    /// The column holds the synthetic attribute's value for every row —
    /// the reading consistent with the counterfactual construction,
    /// which overwrites the column with the negated label.
    #[default]
    EncodeValue,
    /// The column holds 1 only on the rows whose attribute value was
    /// flipped away from the label (an alternative literal reading of
    /// the construction, kept behind this flag).
    MarkFlipped,
}

/// Calibration run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    /// Fractions of rows whose synthetic attribute is flipped away from
    /// the label; strictly ascending, each in [0, 0.5).
    pub flip_fractions: Vec<f64>,
    /// Task model trained per fold (reseeded per fraction and fold).
    pub task_model: PredictorSpec,
    /// Folds of the train/test cycle.
    pub folds: usize,
    pub artifact_mode: ArtifactMode,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            flip_fractions: vec![0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.49],
            task_model: PredictorSpec::with_defaults(ModelFamily::Mlp, 0),
            folds: 3,
            artifact_mode: ArtifactMode::default(),
            seed: 0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.flip_fractions.is_empty() {
            return Err(AuditError::InvalidArgument(
                "calibration needs at least one flip fraction".into(),
            ));
        }
        for pair in self.flip_fractions.windows(2) {
            if pair[1] <= pair[0] {
                return Err(AuditError::InvalidArgument(format!(
                    "flip fractions must be strictly ascending, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &f in &self.flip_fractions {
            if !(0.0..0.5).contains(&f) {
                return Err(AuditError::InvalidArgument(format!(
                    "flip fraction {f} outside [0, 0.5)"
                )));
            }
        }
        if self.folds < 2 {
            return Err(AuditError::InvalidArgument(format!(
                "calibration folds must be at least 2, got {}",
                self.folds
            )));
        }
        Ok(())
    }
}

/// One calibrated point: the realized attribute↔label association and
/// the AUC cost of relying on an artifact at that association strength.
///
/// Point estimates pool the out-of-fold scores; intervals are 95%
/// t-intervals over the per-fold values (so a pooled estimate can sit
/// slightly off its interval's center).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub flip_fraction: f64,
    /// Chance-adjusted association between the planted attribute and
    /// the label after flipping.
    pub utility: AmiScore,
    /// AUC on held-out rows as generated (artifact correlated with Y).
    pub auc_correlated: f64,
    /// AUC on the same rows with the artifact overwritten to ¬Y.
    pub auc_counterfactual: f64,
    /// `auc_correlated − auc_counterfactual`.
    pub auc_drop: f64,
    pub ci_correlated: (f64, f64),
    pub ci_counterfactual: (f64, f64),
    pub ci_drop: (f64, f64),
    pub warnings: Vec<String>,
}

/// A fraction whose cycle could not complete; the rest of the curve is
/// unaffected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFailure {
    pub flip_fraction: f64,
    pub error: String,
}

/// The full calibration curve over all requested fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub fingerprint: DatasetFingerprint,
    pub task_family: ModelFamily,
    pub folds: usize,
    pub artifact_mode: ArtifactMode,
    pub seed: u64,
    pub rows: Vec<CalibrationRow>,
    pub failures: Vec<CalibrationFailure>,
    pub warnings: Vec<String>,
}

/// The dataset's label as a binary series covering every row.
fn binary_label(ds: &Dataset) -> Result<(CategoricalSeries, Vec<String>)> {
    let rows = ds.rows_with_label();
    if rows.len() != ds.n_rows() {
        return Err(AuditError::Data(format!(
            "calibration needs a label on every row; {} rows lack one",
            ds.n_rows() - rows.len()
        )));
    }
    let (y, warnings) = prepare_label(ds.label(), &rows)?;
    let y = y.densified();
    if y.cardinality() != 2 {
        return Err(AuditError::InvalidArgument(format!(
            "calibration needs a binary label; {:?} has {} values",
            ds.label_name(),
            y.cardinality()
        )));
    }
    Ok((y, warnings))
}

/// Plant a synthetic binary attribute: start as a copy of the label,
/// flip a seeded uniform sample of ⌊flip_fraction·N⌋ rows, and append a
/// feature column that encodes the attribute exactly (so any surrogate
/// can recover it perfectly). Returns the augmented dataset and the
/// attribute.
pub fn inject_synthetic(
    ds: &Dataset,
    flip_fraction: f64,
    seed: u64,
) -> Result<(Dataset, CategoricalSeries)> {
    inject_synthetic_with(ds, flip_fraction, seed, ArtifactMode::EncodeValue)
}

/// [`inject_synthetic`] with an explicit artifact encoding.
pub fn inject_synthetic_with(
    ds: &Dataset,
    flip_fraction: f64,
    seed: u64,
    mode: ArtifactMode,
) -> Result<(Dataset, CategoricalSeries)> {
    if !(0.0..0.5).contains(&flip_fraction) {
        return Err(AuditError::InvalidArgument(format!(
            "flip fraction {flip_fraction} outside [0, 0.5)"
        )));
    }
    let (y, _) = binary_label(ds)?;
    let n = ds.n_rows();
    let flips = (flip_fraction * n as f64).floor() as usize;

    let mut codes: Vec<u32> = y.codes().to_vec();
    let mut flipped = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["flips"]));
    for t in 0..flips {
        let j = rng.random_range(t..n);
        order.swap(t, j);
        let row = order[t];
        codes[row] = 1 - codes[row];
        flipped[row] = true;
    }
    let attribute =
        CategoricalSeries::from_codes(codes, vec!["0".to_string(), "1".to_string()])?;

    let column: Vec<Option<f64>> = match mode {
        ArtifactMode::EncodeValue => attribute
            .codes()
            .iter()
            .map(|&c| Some(f64::from(c)))
            .collect(),
        ArtifactMode::MarkFlipped => flipped.iter().map(|&f| Some(f64::from(u8::from(f)))).collect(),
    };
    let augmented = ds.with_feature_column(ARTIFACT_COLUMN, RawColumn::Continuous(column))?;
    Ok((augmented, attribute))
}

/// Rewrite a test matrix into its worst case for an artifact-reliant
/// model: the artifact column becomes ¬Y (anti-correlated with the
/// label), every other column is untouched. Overwriting ignores the
/// column's current content, so the operation is idempotent.
pub fn make_counterfactual(
    x: ArrayView2<'_, f64>,
    feature_names: &[String],
    y: &CategoricalSeries,
) -> Result<Array2<f64>> {
    if feature_names.len() != x.ncols() {
        return Err(AuditError::InvalidArgument(format!(
            "{} feature names for a {}-column matrix",
            feature_names.len(),
            x.ncols()
        )));
    }
    let artifact = feature_names
        .iter()
        .position(|n| n == ARTIFACT_COLUMN)
        .ok_or_else(|| {
            AuditError::InvalidArgument(format!(
                "no {ARTIFACT_COLUMN:?} column; inject a synthetic attribute first"
            ))
        })?;
    if y.len() != x.nrows() {
        return Err(AuditError::InvalidArgument(format!(
            "{} labels for a {}-row matrix",
            y.len(),
            x.nrows()
        )));
    }
    if y.cardinality() != 2 {
        return Err(AuditError::InvalidArgument(format!(
            "counterfactual rewrite needs a binary label, got {} values",
            y.cardinality()
        )));
    }
    let mut out = x.to_owned();
    for (i, &c) in y.codes().iter().enumerate() {
        out[[i, artifact]] = f64::from(1 - c);
    }
    Ok(out)
}

/// 95% t-interval for the mean of `values` (sample SD, k−1 degrees of
/// freedom).
fn t_interval(values: &[f64]) -> Result<(f64, f64)> {
    let k = values.len();
    if k < 2 {
        return Err(AuditError::InsufficientData(
            "a t-interval needs at least two folds".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (k - 1) as f64)
        .map_err(|e| AuditError::InvalidArgument(format!("t-distribution: {e}")))?
        .inverse_cdf(0.975);
    let half = t * (var / k as f64).sqrt();
    Ok((mean - half, mean + half))
}

/// Positive-class score column for binary probabilities.
fn positive_scores(proba: &Array2<f64>) -> Vec<f64> {
    proba.column(1).to_vec()
}

fn calibrate_fraction(
    ds: &Dataset,
    y: &CategoricalSeries,
    cfg: &CalibrationConfig,
    flip_fraction: f64,
) -> Result<CalibrationRow> {
    let fraction_seed = derive_seed(cfg.seed, &["calibration", &flip_fraction.to_string()]);
    let (augmented, attribute) =
        inject_synthetic_with(ds, flip_fraction, fraction_seed, cfg.artifact_mode)?;
    let utility = score_pair(&attribute, y, Normalization::Max)?;

    let features = augmented.features()?;
    let x = features.matrix.view();
    let n = y.len();
    let plan = plan_folds(n, cfg.folds, Some(y), derive_seed(fraction_seed, &["plan"]))?;
    let mut warnings: Vec<String> = plan.warnings().to_vec();

    let mut pooled_labels: Vec<u32> = Vec::with_capacity(n);
    let mut pooled_correlated: Vec<f64> = Vec::with_capacity(n);
    let mut pooled_counterfactual: Vec<f64> = Vec::with_capacity(n);
    let mut fold_correlated = Vec::with_capacity(cfg.folds);
    let mut fold_counterfactual = Vec::with_capacity(cfg.folds);
    let mut fold_drops = Vec::with_capacity(cfg.folds);

    for fold in 0..cfg.folds {
        let (train, test) = plan.split(fold);
        if test.is_empty() {
            continue;
        }
        let x_train = x.select(Axis(0), &train);
        let y_train: Vec<u32> = train.iter().map(|&i| y.codes()[i]).collect();
        let spec = cfg
            .task_model
            .reseeded(derive_seed(fraction_seed, &["fold", &fold.to_string()]));
        let model = fit(&spec, x_train.view(), &y_train, 2, &features.meta)?;

        let x_test = x.select(Axis(0), &test);
        let y_test: Vec<u32> = test.iter().map(|&i| y.codes()[i]).collect();
        let y_test_series = y.select(&test);
        let correlated = positive_scores(&model.predict_proba(x_test.view())?);
        let x_cf = make_counterfactual(x_test.view(), &features.names, &y_test_series)?;
        let counterfactual = positive_scores(&model.predict_proba(x_cf.view())?);

        let auc_corr = auc(&correlated, &y_test)?;
        let auc_cf = auc(&counterfactual, &y_test)?;
        fold_correlated.push(auc_corr);
        fold_counterfactual.push(auc_cf);
        fold_drops.push(auc_corr - auc_cf);
        pooled_labels.extend_from_slice(&y_test);
        pooled_correlated.extend(correlated);
        pooled_counterfactual.extend(counterfactual);
    }

    let auc_correlated = auc(&pooled_correlated, &pooled_labels)?;
    let auc_counterfactual = auc(&pooled_counterfactual, &pooled_labels)?;
    let ci_correlated = t_interval(&fold_correlated)?;
    let ci_counterfactual = t_interval(&fold_counterfactual)?;
    let ci_drop = t_interval(&fold_drops)?;
    warnings.dedup();

    Ok(CalibrationRow {
        flip_fraction,
        utility,
        auc_correlated,
        auc_counterfactual,
        auc_drop: auc_correlated - auc_counterfactual,
        ci_correlated,
        ci_counterfactual,
        ci_drop,
        warnings,
    })
}

/// Run the calibration cycle over every configured flip fraction.
///
/// Per fraction: plant the synthetic attribute, cycle K stratified
/// folds (train the task model on K−1, score the held-out fold on the
/// data as generated and again after [`make_counterfactual`]), pool the
/// out-of-fold scores into the row's AUCs, and attach per-fold
/// t-intervals. A fraction that fails is recorded and skipped; the
/// remaining fractions still produce rows.
pub fn run_calibration(ds: &Dataset, cfg: &CalibrationConfig) -> Result<CalibrationCurve> {
    cfg.validate()?;
    let (y, label_warnings) = binary_label(ds)?;
    let encoded;
    let ds = if ds.is_encoded() {
        ds
    } else {
        encoded = crate::dataset::encode_features(ds.clone())?;
        &encoded
    };

    let outcomes: Vec<(f64, Result<CalibrationRow>)> = cfg
        .flip_fractions
        .par_iter()
        .map(|&fraction| (fraction, calibrate_fraction(ds, &y, cfg, fraction)))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (fraction, outcome) in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(CalibrationFailure {
                flip_fraction: fraction,
                error: e.to_string(),
            }),
        }
    }
    Ok(CalibrationCurve {
        fingerprint: ds.fingerprint(),
        task_family: cfg.task_model.family(),
        folds: cfg.folds,
        artifact_mode: cfg.artifact_mode,
        seed: cfg.seed,
        rows,
        failures,
        warnings: label_warnings,
    })
}
