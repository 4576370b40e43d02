//! The audit procedure: fold planning, cross-validated surrogate
//! prediction (optionally conditioned on the label), utility estimation
//! with bootstrap confidence intervals, and per-attribute report assembly.

use crate::dataset::{CategoricalSeries, Dataset, DatasetFingerprint, FeatureMeta, RawColumn};
use crate::discretize::{discretize, fd_bins, merge_rare};
use crate::error::{AuditError, Result};
use crate::info::{adjusted_mi_with, AmiScore, ContingencyTable, Normalization};
use crate::metrics::basic_bootstrap_ci;
use crate::models::{fit_weighted, ModelFamily, PredictorSpec, Weighting};
use crate::seeding::derive_seed;
use ndarray::{ArrayView2, Axis, CowArray, Ix2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Causal direction assumed between features and label, which decides
/// whether surrogate training is partitioned by label value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionMode {
    /// Features cause the label; surrogates train on all rows at once.
    #[default]
    CausalXToY,
    /// Label causes the features; surrogates train within each label
    /// value so association carried by the label itself is not counted.
    AnticausalYToX,
}

impl DirectionMode {
    pub fn name(self) -> &'static str {
        match self {
            DirectionMode::CausalXToY => "causal_x_to_y",
            DirectionMode::AnticausalYToX => "anticausal_y_to_x",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "causal_x_to_y" => Some(DirectionMode::CausalXToY),
            "anticausal_y_to_x" => Some(DirectionMode::AnticausalYToX),
            _ => None,
        }
    }
}

/// A deterministic assignment of rows to disjoint, covering folds.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
    warnings: Vec<String>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Fold id per row, each in `[0, k)`.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// Row indices held out by `fold` and the complementary training rows.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignment.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

/// Plan `k` folds over `n` rows, optionally stratified.
///
/// Rows are dealt round-robin onto folds with a cursor that continues
/// across strata, so fold sizes differ by at most one both overall and
/// within every stratum. Order within a stratum is shuffled by `seed`.
/// A stratum with fewer rows than folds simply occupies fewer folds; a
/// warning records it.
pub fn plan_folds(
    n: usize,
    k: usize,
    stratify: Option<&CategoricalSeries>,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(AuditError::InvalidArgument(format!(
            "fold count must be at least 2, got {k}"
        )));
    }
    if k > n {
        return Err(AuditError::InvalidArgument(format!(
            "cannot plan {k} folds over {n} rows"
        )));
    }
    let strata: Vec<Vec<usize>> = match stratify {
        Some(key) => {
            if key.len() != n {
                return Err(AuditError::InvalidArgument(format!(
                    "stratification key has {} entries for {n} rows",
                    key.len()
                )));
            }
            let mut groups = vec![Vec::new(); key.cardinality()];
            for (i, &c) in key.codes().iter().enumerate() {
                groups[c as usize].push(i);
            }
            groups
        }
        None => vec![(0..n).collect()],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    let mut warnings = Vec::new();
    let mut cursor = 0usize;
    for (code, mut rows) in strata.into_iter().enumerate() {
        if rows.is_empty() {
            continue; // declared category with no rows: nothing to place
        }
        if rows.len() < k {
            let name = stratify
                .map(|key| key.category_names()[code].clone())
                .unwrap_or_default();
            warnings.push(format!(
                "stratum {name:?} has {} rows for {k} folds; it spans only {} folds",
                rows.len(),
                rows.len()
            ));
        }
        rows.shuffle(&mut rng);
        for row in rows {
            assignment[row] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldPlan {
        k,
        assignment,
        warnings,
    })
}

/// Out-of-fold predictions: every row predicted exactly once, by the model
/// whose training split excluded that row.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPrediction {
    pub predicted: CategoricalSeries,
    pub warnings: Vec<String>,
}

/// Cross-validated prediction of `a` from `x` under `plan`.
///
/// The model for fold `f` trains on all rows outside `f` (reseeded per
/// fold from `spec.seed`) and predicts the rows of `f`. A training split
/// missing one of `a`'s categories is legal — the fitted model assigns
/// that category zero probability — but is surfaced as a warning.
pub fn cross_val_predict(
    x: ArrayView2<'_, f64>,
    meta: &FeatureMeta,
    a: &CategoricalSeries,
    spec: &PredictorSpec,
    plan: &FoldPlan,
) -> Result<CvPrediction> {
    cross_val_predict_weighted(x, meta, a, spec, plan, Weighting::Balanced)
}

/// [`cross_val_predict`] with an explicit class-weighting policy.
pub(crate) fn cross_val_predict_weighted(
    x: ArrayView2<'_, f64>,
    meta: &FeatureMeta,
    a: &CategoricalSeries,
    spec: &PredictorSpec,
    plan: &FoldPlan,
    weighting: Weighting,
) -> Result<CvPrediction> {
    let n = a.len();
    if x.nrows() != n || plan.n() != n {
        return Err(AuditError::InvalidArgument(format!(
            "cross-validation inputs disagree on row count: x {}, target {n}, plan {}",
            x.nrows(),
            plan.n()
        )));
    }
    let class_count = a.cardinality();
    let mut codes = vec![0u32; n];
    let mut warnings = Vec::new();
    for fold in 0..plan.k() {
        let (train, test) = plan.split(fold);
        if test.is_empty() {
            continue;
        }
        let x_train = x.select(Axis(0), &train);
        let y_train: Vec<u32> = train.iter().map(|&i| a.codes()[i]).collect();
        let mut seen = vec![false; class_count];
        for &c in &y_train {
            seen[c as usize] = true;
        }
        for (c, &present) in seen.iter().enumerate() {
            if !present {
                warnings.push(format!(
                    "fold {fold} training split lacks category {:?}; it gets zero probability",
                    a.category_names()[c]
                ));
            }
        }
        let fold_spec = spec.reseeded(derive_seed(spec.seed, &["fold", &fold.to_string()]));
        let model = fit_weighted(&fold_spec, x_train.view(), &y_train, class_count, meta, weighting)?;
        let x_test = x.select(Axis(0), &test);
        let predictions = model.predict(x_test.view())?;
        for (&row, &p) in test.iter().zip(&predictions) {
            codes[row] = p;
        }
    }
    Ok(CvPrediction {
        predicted: CategoricalSeries::from_codes(codes, a.category_names().to_vec())?,
        warnings,
    })
}

/// Result of one detectability estimation: the chance-adjusted agreement
/// between the attribute and its out-of-fold reconstruction, plus the
/// aligned (actual, predicted) pairs the score was computed from (rows a
/// conditioned run excluded are absent from both).
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub score: AmiScore,
    pub actual: CategoricalSeries,
    pub predicted: CategoricalSeries,
    pub warnings: Vec<String>,
}

/// Adjusted MI between two code series, ignoring categories that never
/// occur (resamples and per-partition selections can empty a category).
pub(crate) fn score_pair(
    a: &CategoricalSeries,
    b: &CategoricalSeries,
    norm: Normalization,
) -> Result<AmiScore> {
    let table = trimmed_contingency(a, b)?;
    adjusted_mi_with(&table, norm)
}

fn trimmed_contingency(a: &CategoricalSeries, b: &CategoricalSeries) -> Result<ContingencyTable> {
    let (ra, ca) = (a.cardinality(), b.cardinality());
    let mut counts = vec![vec![0u64; ca]; ra];
    for (&i, &j) in a.codes().iter().zip(b.codes()) {
        counts[i as usize][j as usize] += 1;
    }
    let keep_cols: Vec<usize> = (0..ca)
        .filter(|&j| counts.iter().any(|row| row[j] > 0))
        .collect();
    let trimmed: Vec<Vec<u64>> = counts
        .into_iter()
        .filter(|row| row.iter().any(|&v| v > 0))
        .map(|row| keep_cols.iter().map(|&j| row[j]).collect())
        .collect();
    ContingencyTable::from_counts(trimmed)
}

/// Detectability without label conditioning (assumed direction X → Y):
/// cross-validated recovery of the attribute from the features over all
/// rows, folds stratified on the attribute.
pub fn detect_unconditioned(
    x: ArrayView2<'_, f64>,
    meta: &FeatureMeta,
    a: &CategoricalSeries,
    spec: &PredictorSpec,
    k: usize,
    seed: u64,
    norm: Normalization,
) -> Result<Detection> {
    let n = a.len();
    if n < 10 * k {
        return Err(AuditError::InsufficientData(format!(
            "{n} rows is fewer than 10 per fold for {k} folds"
        )));
    }
    let plan = plan_folds(n, k, Some(a), derive_seed(seed, &["plan"]))?;
    let fit_spec = spec.reseeded(derive_seed(seed, &["fit"]));
    let cv = cross_val_predict(x, meta, a, &fit_spec, &plan)?;
    let score = score_pair(a, &cv.predicted, norm)?;
    let mut warnings = plan.warnings().to_vec();
    warnings.extend(cv.warnings);
    Ok(Detection {
        score,
        actual: a.clone(),
        predicted: cv.predicted,
        warnings,
    })
}

/// Detectability conditioned on the label (assumed direction Y → X):
/// independent surrogates are cross-validated within each label value,
/// their out-of-fold predictions concatenated, and the agreement scored
/// over all surviving rows. Small partitions shrink their fold count
/// (minimum 2, with a warning); partitions under 20 rows are excluded
/// (with a warning). A single-valued label degenerates to the
/// unconditioned estimate.
pub fn detect_conditioned(
    x: ArrayView2<'_, f64>,
    meta: &FeatureMeta,
    a: &CategoricalSeries,
    y: &CategoricalSeries,
    spec: &PredictorSpec,
    k: usize,
    seed: u64,
    norm: Normalization,
) -> Result<Detection> {
    let n = a.len();
    if y.len() != n || x.nrows() != n {
        return Err(AuditError::InvalidArgument(format!(
            "conditioned detection inputs disagree on row count: x {}, attribute {n}, label {}",
            x.nrows(),
            y.len()
        )));
    }
    let occupied = y.category_counts().iter().filter(|&&c| c > 0).count();
    if occupied <= 1 {
        return detect_unconditioned(x, meta, a, spec, k, seed, norm);
    }

    let mut predicted_at: Vec<Option<u32>> = vec![None; n];
    let mut warnings = Vec::new();
    for (code, &count) in y.category_counts().iter().enumerate() {
        if count == 0 {
            continue;
        }
        let label_name = &y.category_names()[code];
        let rows: Vec<usize> = y
            .codes()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c as usize == code)
            .map(|(i, _)| i)
            .collect();
        if rows.len() < 20 {
            warnings.push(format!(
                "label partition {label_name:?} has {} rows; excluded from detection",
                rows.len()
            ));
            continue;
        }
        let mut k_p = k;
        if rows.len() < 10 * k {
            k_p = (rows.len() / 10).clamp(2, k);
            warnings.push(format!(
                "label partition {label_name:?} has {} rows; folds reduced {k} -> {k_p}",
                rows.len()
            ));
        }
        let x_part = x.select(Axis(0), &rows);
        let a_part = a.select(&rows);
        let part_seed = derive_seed(seed, &["partition", label_name]);
        let plan = plan_folds(rows.len(), k_p, Some(&a_part), derive_seed(part_seed, &["plan"]))?;
        let fit_spec = spec.reseeded(derive_seed(part_seed, &["fit"]));
        let cv = cross_val_predict(x_part.view(), meta, &a_part, &fit_spec, &plan)?;
        warnings.extend(
            plan.warnings()
                .iter()
                .chain(&cv.warnings)
                .map(|w| format!("label partition {label_name:?}: {w}")),
        );
        for (&row, &p) in rows.iter().zip(cv.predicted.codes()) {
            predicted_at[row] = Some(p);
        }
    }

    let included: Vec<usize> = (0..n).filter(|&i| predicted_at[i].is_some()).collect();
    if included.len() < 10 * 2 {
        return Err(AuditError::InsufficientData(format!(
            "only {} rows survived label partitioning",
            included.len()
        )));
    }
    let actual = a.select(&included);
    let predicted = CategoricalSeries::from_codes(
        included
            .iter()
            .map(|&i| predicted_at[i].expect("included rows have predictions"))
            .collect(),
        a.category_names().to_vec(),
    )?;
    let score = score_pair(&actual, &predicted, norm)?;
    Ok(Detection {
        score,
        actual,
        predicted,
        warnings,
    })
}

/// Attribute↔label association with a basic-bootstrap confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Utility {
    pub score: AmiScore,
    pub ci: (f64, f64),
    pub warnings: Vec<String>,
}

const ZERO_SCORE: AmiScore = AmiScore {
    mi: 0.0,
    emi: 0.0,
    h_row: 0.0,
    h_col: 0.0,
    ami: 0.0,
};

/// Chance-adjusted attribute↔label association. The confidence interval
/// is a basic bootstrap over jointly resampled rows:
/// `[2θ̂ − q₀.₉₇₅, 2θ̂ − q₀.₀₂₅]`.
pub fn compute_utility(
    a: &CategoricalSeries,
    y: &CategoricalSeries,
    replicates: usize,
    seed: u64,
    norm: Normalization,
) -> Result<Utility> {
    let n = a.len();
    if y.len() != n {
        return Err(AuditError::InvalidArgument(format!(
            "utility inputs disagree on row count: {n} vs {}",
            y.len()
        )));
    }
    if n < 20 {
        return Err(AuditError::InsufficientData(format!(
            "utility needs at least 20 rows, got {n}"
        )));
    }
    let occupied = |s: &CategoricalSeries| s.category_counts().iter().filter(|&&c| c > 0).count();
    if occupied(a) <= 1 || occupied(y) <= 1 {
        return Ok(Utility {
            score: ZERO_SCORE,
            ci: (0.0, 0.0),
            warnings: vec!["single-category input; utility is 0 by definition".into()],
        });
    }
    let score = score_pair(a, y, norm)?;
    let (ci, warnings) = bootstrap_pair_ci(a, y, score.ami, replicates, seed, norm)?;
    Ok(Utility {
        score,
        ci,
        warnings,
    })
}

/// Basic-bootstrap CI for the adjusted MI of paired series, resampling
/// pairs with replacement (no model retraining).
fn bootstrap_pair_ci(
    a: &CategoricalSeries,
    b: &CategoricalSeries,
    theta: f64,
    replicates: usize,
    seed: u64,
    norm: Normalization,
) -> Result<((f64, f64), Vec<String>)> {
    let n = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reps = Vec::with_capacity(replicates);
    let mut idx = vec![0usize; n];
    for _ in 0..replicates {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        let ar = a.select(&idx);
        let br = b.select(&idx);
        reps.push(score_pair(&ar, &br, norm)?.ami);
    }
    let ci = basic_bootstrap_ci(theta, &reps)?;
    let mut warnings = Vec::new();
    if theta < ci.0 || theta > ci.1 {
        warnings.push(format!(
            "estimate {theta:.6} lies outside its bootstrap interval [{:.6}, {:.6}] (skewed resampling distribution)",
            ci.0, ci.1
        ));
    }
    Ok((ci, warnings))
}

/// Detectability of one attribute under one surrogate family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDetectability {
    pub family: ModelFamily,
    pub score: AmiScore,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Everything measured about one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeAudit {
    pub name: String,
    /// rows surviving missing-value exclusion (attribute and label)
    pub n_used: usize,
    pub utility: AmiScore,
    pub utility_ci: (f64, f64),
    /// per-family detectability, in configured family order
    pub detectability: Vec<FamilyDetectability>,
    /// max over family scores
    pub detectability_ensemble: f64,
    pub mode: DirectionMode,
    pub warnings: Vec<String>,
    /// set when the attribute could not be audited; scores are zeroed
    pub error: Option<String>,
}

impl AttributeAudit {
    /// Report-ordering key: high detectability of a genuinely useful
    /// attribute ranks first. Failed attributes sort last.
    pub fn risk_rank_score(&self) -> f64 {
        if self.error.is_some() {
            f64::NEG_INFINITY
        } else {
            self.detectability_ensemble * self.utility.ami.max(0.0)
        }
    }
}

/// Audit configuration. `attributes: None` audits every attribute column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub attributes: Option<Vec<String>>,
    pub families: Vec<ModelFamily>,
    pub folds: usize,
    pub replicates: usize,
    pub min_count: usize,
    pub mode: DirectionMode,
    pub normalization: Normalization,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            attributes: None,
            families: ModelFamily::ALL.to_vec(),
            folds: 3,
            replicates: 1000,
            min_count: 100,
            mode: DirectionMode::default(),
            normalization: Normalization::default(),
            seed: 0,
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(AuditError::InvalidArgument(format!(
                "folds must be at least 2, got {}",
                self.folds
            )));
        }
        if self.replicates < 20 {
            return Err(AuditError::InvalidArgument(format!(
                "bootstrap replicates must be at least 20, got {}",
                self.replicates
            )));
        }
        if self.min_count == 0 {
            return Err(AuditError::InvalidArgument(
                "min_count must be at least 1".into(),
            ));
        }
        if self.families.is_empty() {
            return Err(AuditError::InvalidArgument(
                "at least one model family is required".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for f in &self.families {
            if !seen.insert(f) {
                return Err(AuditError::InvalidArgument(format!(
                    "model family {f} listed twice"
                )));
            }
        }
        if let Some(names) = &self.attributes {
            let mut seen = std::collections::HashSet::new();
            for n in names {
                if !seen.insert(n) {
                    return Err(AuditError::InvalidArgument(format!(
                        "attribute {n:?} listed twice"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The complete audit result: identity of the data, the configuration it
/// ran under, and one entry per attribute, ranked riskiest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub fingerprint: DatasetFingerprint,
    pub config: AuditConfig,
    pub seed: u64,
    pub attributes: Vec<AttributeAudit>,
    pub warnings: Vec<String>,
}

/// Prepared per-attribute target: surviving rows and the categorical
/// series over them.
pub(crate) fn prepare_attribute(
    col: &RawColumn,
    rows: &[usize],
    min_count: usize,
) -> Result<(CategoricalSeries, Vec<String>)> {
    let mut warnings = Vec::new();
    let series = match col {
        RawColumn::Categorical(values) => {
            let present: Vec<&str> = rows
                .iter()
                .map(|&i| values[i].as_deref().expect("rows pre-filtered to present"))
                .collect();
            CategoricalSeries::from_strings(&present)?
        }
        RawColumn::Continuous(values) => {
            let present: Vec<f64> = rows
                .iter()
                .map(|&i| values[i].expect("rows pre-filtered to present"))
                .collect();
            let bins = fd_bins(&present)?;
            let series = discretize(&present, &bins)?;
            warnings.push(format!(
                "continuous attribute discretized into {} bins",
                series.cardinality()
            ));
            series
        }
    };
    let before = series.cardinality();
    let merged = merge_rare(&series, min_count)?;
    if merged.cardinality() != before {
        warnings.push(format!(
            "rare-category merge: {before} -> {} categories (min count {min_count})",
            merged.cardinality()
        ));
    }
    Ok((merged, warnings))
}

pub(crate) fn prepare_label(
    col: &RawColumn,
    rows: &[usize],
) -> Result<(CategoricalSeries, Vec<String>)> {
    match col {
        RawColumn::Categorical(values) => {
            let present: Vec<&str> = rows
                .iter()
                .map(|&i| values[i].as_deref().expect("rows have labels"))
                .collect();
            Ok((CategoricalSeries::from_strings(&present)?, Vec::new()))
        }
        RawColumn::Continuous(values) => {
            let present: Vec<f64> = rows
                .iter()
                .map(|&i| values[i].expect("rows have labels"))
                .collect();
            let bins = fd_bins(&present)?;
            let series = discretize(&present, &bins)?;
            let warning = format!(
                "continuous label discretized into {} bins for auditing",
                series.cardinality()
            );
            Ok((series, vec![warning]))
        }
    }
}

/// Sorted intersection of two ascending index lists.
fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn audit_attribute(
    ds: &Dataset,
    name: &str,
    y_at: &[Option<u32>],
    y_names: &[String],
    config: &AuditConfig,
) -> Result<AttributeAudit> {
    let attr_rows = ds.rows_with_attribute(name)?;
    let label_rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| y_at[i].is_some()).collect();
    let rows = intersect_sorted(&attr_rows, &label_rows);
    let n_used = rows.len();
    if n_used < 20 {
        return Err(AuditError::InsufficientData(format!(
            "{n_used} rows have both attribute {name:?} and a label"
        )));
    }
    let mut warnings = Vec::new();
    if n_used < ds.n_rows() {
        warnings.push(format!(
            "{} of {} rows excluded for missing attribute or label",
            ds.n_rows() - n_used,
            ds.n_rows()
        ));
    }

    let (a, prep_warnings) = prepare_attribute(ds.attribute(name)?, &rows, config.min_count)?;
    warnings.extend(prep_warnings);
    let y = CategoricalSeries::from_codes(
        rows.iter()
            .map(|&i| y_at[i].expect("intersection rows have labels"))
            .collect(),
        y_names.to_vec(),
    )?;

    if a.cardinality() == 1 {
        warnings.push("attribute degenerate after rare-category merge; scores are 0".into());
        return Ok(AttributeAudit {
            name: name.to_string(),
            n_used,
            utility: ZERO_SCORE,
            utility_ci: (0.0, 0.0),
            detectability: config
                .families
                .iter()
                .map(|&family| FamilyDetectability {
                    family,
                    score: ZERO_SCORE,
                    ci_low: 0.0,
                    ci_high: 0.0,
                })
                .collect(),
            detectability_ensemble: 0.0,
            mode: config.mode,
            warnings,
            error: None,
        });
    }

    let utility = compute_utility(
        &a,
        &y,
        config.replicates,
        derive_seed(config.seed, &["attr", name, "utility"]),
        config.normalization,
    )?;
    warnings.extend(utility.warnings.iter().map(|w| format!("utility: {w}")));

    let encoded = ds.features()?;
    let x: CowArray<'_, f64, Ix2> = if rows.len() == ds.n_rows() {
        CowArray::from(encoded.matrix.view())
    } else {
        CowArray::from(encoded.matrix.select(Axis(0), &rows))
    };

    let mut detectability = Vec::with_capacity(config.families.len());
    for &family in &config.families {
        let family_seed = derive_seed(config.seed, &["attr", name, "family", family.name()]);
        let spec = PredictorSpec::with_defaults(family, family_seed);
        let detection = match config.mode {
            DirectionMode::CausalXToY => detect_unconditioned(
                x.view(),
                &encoded.meta,
                &a,
                &spec,
                config.folds,
                derive_seed(family_seed, &["detect"]),
                config.normalization,
            )?,
            DirectionMode::AnticausalYToX => detect_conditioned(
                x.view(),
                &encoded.meta,
                &a,
                &y,
                &spec,
                config.folds,
                derive_seed(family_seed, &["detect"]),
                config.normalization,
            )?,
        };
        warnings.extend(detection.warnings.iter().map(|w| format!("{family}: {w}")));
        let (ci, ci_warnings) = bootstrap_pair_ci(
            &detection.actual,
            &detection.predicted,
            detection.score.ami,
            config.replicates,
            derive_seed(family_seed, &["ci"]),
            config.normalization,
        )?;
        warnings.extend(ci_warnings.iter().map(|w| format!("{family}: {w}")));
        detectability.push(FamilyDetectability {
            family,
            score: detection.score,
            ci_low: ci.0,
            ci_high: ci.1,
        });
    }
    let detectability_ensemble = detectability
        .iter()
        .map(|d| d.score.ami)
        .fold(f64::NEG_INFINITY, f64::max);

    Ok(AttributeAudit {
        name: name.to_string(),
        n_used,
        utility: utility.score,
        utility_ci: utility.ci,
        detectability,
        detectability_ensemble,
        mode: config.mode,
        warnings,
        error: None,
    })
}

/// Run the full audit: per attribute, exclude rows with missing values,
/// discretize and rare-merge the target, estimate utility and per-family
/// detectability (conditioned on the label iff the mode is anti-causal),
/// and rank attributes by `detectability_ensemble × max(utility, 0)`.
/// Per-attribute failures are recorded on their entries; the run
/// continues. The result is deterministic in (dataset, config) and
/// independent of thread scheduling.
pub fn run_audit(ds: &Dataset, config: &AuditConfig) -> Result<AuditReport> {
    config.validate()?;
    let encoded_check = ds.features();
    if let Err(e) = encoded_check {
        return Err(AuditError::InvalidArgument(format!(
            "dataset features are not encoded: {e}"
        )));
    }

    let mut warnings = Vec::new();
    let label_rows = ds.rows_with_label();
    if label_rows.is_empty() {
        return Err(AuditError::InsufficientData(
            "every row is missing the label".into(),
        ));
    }
    if label_rows.len() < ds.n_rows() {
        warnings.push(format!(
            "{} of {} rows have no label and are excluded",
            ds.n_rows() - label_rows.len(),
            ds.n_rows()
        ));
    }
    let (y, label_warnings) = prepare_label(ds.label(), &label_rows)?;
    warnings.extend(label_warnings);
    let mut y_at: Vec<Option<u32>> = vec![None; ds.n_rows()];
    for (pos, &row) in label_rows.iter().enumerate() {
        y_at[row] = Some(y.codes()[pos]);
    }

    let names: Vec<String> = match &config.attributes {
        Some(list) => {
            let known = ds.attribute_names();
            for name in list {
                if !known.contains(&name.as_str()) {
                    return Err(AuditError::InvalidArgument(format!(
                        "attribute {name:?} is not in the dataset (available: {known:?})"
                    )));
                }
            }
            list.clone()
        }
        None => ds.attribute_names().iter().map(|s| s.to_string()).collect(),
    };
    if names.is_empty() {
        warnings.push("no attributes to audit; report is empty".into());
    }

    let y_names = y.category_names().to_vec();
    let mut attributes: Vec<AttributeAudit> = names
        .par_iter()
        .map(|name| {
            audit_attribute(ds, name, &y_at, &y_names, config).unwrap_or_else(|e| AttributeAudit {
                name: name.clone(),
                n_used: 0,
                utility: ZERO_SCORE,
                utility_ci: (0.0, 0.0),
                detectability: Vec::new(),
                detectability_ensemble: 0.0,
                mode: config.mode,
                warnings: Vec::new(),
                error: Some(e.to_string()),
            })
        })
        .collect();

    attributes.sort_by(|l, r| {
        r.risk_rank_score()
            .total_cmp(&l.risk_rank_score())
            .then_with(|| l.name.cmp(&r.name))
    });

    Ok(AuditReport {
        fingerprint: ds.fingerprint(),
        config: config.clone(),
        seed: config.seed,
        attributes,
        warnings,
    })
}

/// One attribute's chance-adjusted association with the label, measured
/// without training any surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRow {
    pub name: String,
    pub n_used: usize,
    pub utility: AmiScore,
    pub utility_ci: (f64, f64),
    pub warnings: Vec<String>,
    /// set when the attribute could not be scored; scores are zeroed
    pub error: Option<String>,
}

impl UtilityRow {
    fn rank_score(&self) -> f64 {
        if self.error.is_some() {
            f64::NEG_INFINITY
        } else {
            self.utility.ami
        }
    }
}

/// Utility-only results for every audited attribute, strongest
/// association first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub fingerprint: DatasetFingerprint,
    pub seed: u64,
    pub replicates: usize,
    pub min_count: usize,
    pub normalization: Normalization,
    pub attributes: Vec<UtilityRow>,
    pub warnings: Vec<String>,
}

fn utility_attribute(
    ds: &Dataset,
    name: &str,
    y_at: &[Option<u32>],
    y_names: &[String],
    config: &AuditConfig,
) -> Result<UtilityRow> {
    let attr_rows = ds.rows_with_attribute(name)?;
    let label_rows: Vec<usize> = (0..ds.n_rows()).filter(|&i| y_at[i].is_some()).collect();
    let rows = intersect_sorted(&attr_rows, &label_rows);
    let n_used = rows.len();
    if n_used < 20 {
        return Err(AuditError::InsufficientData(format!(
            "{n_used} rows have both attribute {name:?} and a label"
        )));
    }
    let mut warnings = Vec::new();
    if n_used < ds.n_rows() {
        warnings.push(format!(
            "{} of {} rows excluded for missing attribute or label",
            ds.n_rows() - n_used,
            ds.n_rows()
        ));
    }
    let (a, prep_warnings) = prepare_attribute(ds.attribute(name)?, &rows, config.min_count)?;
    warnings.extend(prep_warnings);
    let y = CategoricalSeries::from_codes(
        rows.iter()
            .map(|&i| y_at[i].expect("intersection rows have labels"))
            .collect(),
        y_names.to_vec(),
    )?;
    if a.cardinality() == 1 {
        warnings.push("attribute degenerate after rare-category merge; scores are 0".into());
        return Ok(UtilityRow {
            name: name.to_string(),
            n_used,
            utility: ZERO_SCORE,
            utility_ci: (0.0, 0.0),
            warnings,
            error: None,
        });
    }
    // Same seed path as the full audit so the two reports agree digit
    // for digit on shared attributes.
    let utility = compute_utility(
        &a,
        &y,
        config.replicates,
        derive_seed(config.seed, &["attr", name, "utility"]),
        config.normalization,
    )?;
    warnings.extend(utility.warnings);
    Ok(UtilityRow {
        name: name.to_string(),
        n_used,
        utility: utility.score,
        utility_ci: utility.ci,
        warnings,
        error: None,
    })
}

/// Utility-only pass: every attribute's chance-adjusted association with
/// the label, with bootstrap intervals, and nothing trained. Only the
/// association-side settings of the config are consulted (`attributes`,
/// `replicates`, `min_count`, `normalization`, `seed`); fold and model
/// settings are ignored. Per-attribute failures are recorded on their
/// rows and the pass continues.
pub fn run_utility(ds: &Dataset, config: &AuditConfig) -> Result<UtilityReport> {
    if config.replicates < 20 {
        return Err(AuditError::InvalidArgument(format!(
            "bootstrap replicates must be at least 20, got {}",
            config.replicates
        )));
    }
    if config.min_count == 0 {
        return Err(AuditError::InvalidArgument(
            "min_count must be at least 1".into(),
        ));
    }

    let mut warnings = Vec::new();
    let label_rows = ds.rows_with_label();
    if label_rows.is_empty() {
        return Err(AuditError::InsufficientData(
            "every row is missing the label".into(),
        ));
    }
    if label_rows.len() < ds.n_rows() {
        warnings.push(format!(
            "{} of {} rows have no label and are excluded",
            ds.n_rows() - label_rows.len(),
            ds.n_rows()
        ));
    }
    let (y, label_warnings) = prepare_label(ds.label(), &label_rows)?;
    warnings.extend(label_warnings);
    let mut y_at: Vec<Option<u32>> = vec![None; ds.n_rows()];
    for (pos, &row) in label_rows.iter().enumerate() {
        y_at[row] = Some(y.codes()[pos]);
    }

    let names: Vec<String> = match &config.attributes {
        Some(list) => {
            let known = ds.attribute_names();
            for name in list {
                if !known.contains(&name.as_str()) {
                    return Err(AuditError::InvalidArgument(format!(
                        "attribute {name:?} is not in the dataset (available: {known:?})"
                    )));
                }
            }
            list.clone()
        }
        None => ds.attribute_names().iter().map(|s| s.to_string()).collect(),
    };
    if names.is_empty() {
        warnings.push("no attributes to audit; report is empty".into());
    }

    let y_names = y.category_names().to_vec();
    let mut attributes: Vec<UtilityRow> = names
        .iter()
        .map(|name| {
            utility_attribute(ds, name, &y_at, &y_names, config).unwrap_or_else(|e| UtilityRow {
                name: name.clone(),
                n_used: 0,
                utility: ZERO_SCORE,
                utility_ci: (0.0, 0.0),
                warnings: Vec::new(),
                error: Some(e.to_string()),
            })
        })
        .collect();

    attributes.sort_by(|l, r| {
        r.rank_score()
            .total_cmp(&l.rank_score())
            .then_with(|| l.name.cmp(&r.name))
    });

    Ok(UtilityReport {
        fingerprint: ds.fingerprint(),
        seed: config.seed,
        replicates: config.replicates,
        min_count: config.min_count,
        normalization: config.normalization,
        attributes,
        warnings,
    })
}
