//! Frozen-representation linear probing: extract a trained task model's
//! penultimate activations once, cross-validate a linear classifier on
//! them to predict a metadata attribute, and compare the resulting
//! macro-F1 against a majority-class chance baseline. Probe performance
//! above chance means the representation encodes the attribute — an
//! independent line of evidence that corroborates feature-level
//! detectability scores.

use crate::audit::{
    cross_val_predict_weighted, plan_folds, prepare_attribute, prepare_label, AuditConfig,
    AuditReport,
};
use crate::dataset::{CategoricalSeries, Dataset, FeatureMeta};
use crate::error::{AuditError, Result};
use crate::metrics::{accuracy, macro_f1, spearman};
use crate::models::{fit_weighted, FittedModel, ModelFamily, PredictorSpec, Weighting};
use crate::seeding::derive_seed;
use ndarray::Axis;
use serde::{Deserialize, Serialize};

/// Cross-validated attribute recovery from a frozen representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub attribute: String,
    /// Macro-averaged F1 of the out-of-fold probe predictions.
    pub macro_f1: f64,
    pub accuracy: f64,
    /// Macro-F1 of always predicting the attribute's majority category —
    /// the chance floor the probe must beat to indicate encoding.
    pub chance_f1: f64,
    pub folds: usize,
    pub warnings: Vec<String>,
}

/// Majority category, ties resolved toward the lowest code.
fn majority_code(series: &CategoricalSeries) -> u32 {
    let counts = series.category_counts();
    let mut best = 0usize;
    for (c, &count) in counts.iter().enumerate() {
        if count > counts[best] {
            best = c;
        }
    }
    best as u32
}

/// Fit a label predictor on every labeled row, class-balanced, for use
/// as the frozen model behind `split_probe`. A continuous label is
/// discretized the same way the audit prepares it (the warning says how
/// many bins). The model's seed is derived from `seed`, so the same
/// `(dataset, family, seed)` always yields the same parameters.
pub fn train_task_model(
    ds: &Dataset,
    family: ModelFamily,
    seed: u64,
) -> Result<(FittedModel, Vec<String>)> {
    let encoded = ds.features()?;
    let label_rows = ds.rows_with_label();
    if label_rows.len() < 20 {
        return Err(AuditError::InsufficientData(format!(
            "task model needs at least 20 labeled rows, got {}",
            label_rows.len()
        )));
    }
    let (y, warnings) = prepare_label(ds.label(), &label_rows)?;
    if y.category_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(AuditError::InsufficientData(
            "task model needs at least two label categories".into(),
        ));
    }
    let spec = PredictorSpec::with_defaults(family, derive_seed(seed, &["task", "fit"]));
    let model = if label_rows.len() == ds.n_rows() {
        fit_weighted(
            &spec,
            encoded.matrix.view(),
            y.codes(),
            y.cardinality(),
            &encoded.meta,
            Weighting::Balanced,
        )?
    } else {
        let x = encoded.matrix.select(Axis(0), &label_rows);
        fit_weighted(
            &spec,
            x.view(),
            y.codes(),
            y.cardinality(),
            &encoded.meta,
            Weighting::Balanced,
        )?
    };
    Ok((model, warnings))
}

/// Probe a frozen task model's representation for one attribute.
///
/// The representation is extracted once; the task model is never
/// updated (asserted via its parameter hash). A logistic-regression
/// probe — a linear layer trained by gradient descent, standardization
/// included in its fit — is cross-validated on (representation,
/// attribute) with folds stratified on the attribute, and the
/// aggregated out-of-fold predictions are scored. Unlike detectability
/// surrogates the probe trains unweighted: on a representation that
/// does not encode the attribute it collapses to the majority category,
/// which is exactly the chance baseline `chance_f1` reports.
///
/// Continuous attributes are discretized and rare categories merged the
/// same way the audit prepares them (audit-default minimum count), so
/// probe results line up with audit rows attribute-for-attribute.
pub fn split_probe(
    task_model: &FittedModel,
    ds: &Dataset,
    attribute: &str,
    k: usize,
    seed: u64,
) -> Result<ProbeResult> {
    let hash_before = task_model.param_hash();
    let rows = ds.rows_with_attribute(attribute)?;
    if rows.len() < 10 * k {
        return Err(AuditError::InsufficientData(format!(
            "attribute {attribute:?} has {} usable rows; probing with {k} folds needs {}",
            rows.len(),
            10 * k
        )));
    }
    let min_count = AuditConfig::default().min_count;
    let (a, mut warnings) = prepare_attribute(ds.attribute(attribute)?, &rows, min_count)?;
    if a.cardinality() < 2 {
        return Err(AuditError::InsufficientData(format!(
            "attribute {attribute:?} has a single category after preparation; nothing to probe"
        )));
    }

    let features = ds.features()?;
    let x = features.matrix.select(Axis(0), &rows);
    let representation = task_model.representation(x.view())?;
    let meta = FeatureMeta::all_continuous(representation.ncols());

    let plan = plan_folds(rows.len(), k, Some(&a), derive_seed(seed, &["probe", "plan"]))?;
    let probe_spec = PredictorSpec::with_defaults(
        ModelFamily::LogisticRegression,
        derive_seed(seed, &["probe", "fit"]),
    );
    let cv = cross_val_predict_weighted(
        representation.view(),
        &meta,
        &a,
        &probe_spec,
        &plan,
        Weighting::Uniform,
    )?;
    warnings.extend(plan.warnings().iter().cloned());
    warnings.extend(cv.warnings);

    let truth = a.codes();
    let predicted = cv.predicted.codes();
    let constant = vec![majority_code(&a); truth.len()];
    let result = ProbeResult {
        attribute: attribute.to_string(),
        macro_f1: macro_f1(predicted, truth)?,
        accuracy: accuracy(predicted, truth)?,
        chance_f1: macro_f1(&constant, truth)?,
        folds: k,
        warnings,
    };

    if task_model.param_hash() != hash_before {
        return Err(AuditError::Model(
            "task model parameters changed during probing; the probe must leave it frozen"
                .into(),
        ));
    }
    Ok(result)
}

/// Spearman rank correlation between audit detectability and probe
/// macro-F1 across the attributes both measured. High correlation means
/// the cheap feature-level audit ranks attributes the way an expensive
/// trained-representation probe would.
pub fn correlate_detectability(audit: &AuditReport, probes: &[ProbeResult]) -> Result<f64> {
    let mut detectability = Vec::new();
    let mut probe_f1 = Vec::new();
    for probe in probes {
        let row = audit
            .attributes
            .iter()
            .find(|attr| attr.name == probe.attribute && attr.error.is_none());
        if let Some(row) = row {
            detectability.push(row.detectability_ensemble);
            probe_f1.push(probe.macro_f1);
        }
    }
    if detectability.len() < 3 {
        return Err(AuditError::InsufficientData(format!(
            "rank correlation needs at least 3 shared attributes, got {}",
            detectability.len()
        )));
    }
    spearman(&detectability, &probe_f1)
}
