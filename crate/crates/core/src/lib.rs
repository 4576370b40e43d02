//! Core engine for auditing tabular datasets for shortcut-learning risk.
//!
//! The engine quantifies, per metadata attribute:
//!
//! * **utility** — chance-adjusted mutual information between the attribute
//!   and the task label (how much leverage a model would gain by exploiting
//!   the attribute), and
//! * **detectability** — how recoverable the attribute is from the feature
//!   matrix, estimated with cross-validated surrogate models. In anti-causal
//!   settings the surrogates are trained within label partitions so that
//!   association flowing through the label itself is not counted.
//!
//! Supporting modules provide synthetic-shortcut calibration (bounding the
//! worst-case performance drop a shortcut of a given utility can cause), a
//! linear-probe baseline on a trained model's representation, deterministic
//! fold planning, a small dependency-free model zoo, and synthetic dataset
//! generators with analytic ground truth for validation.

pub mod audit;
pub mod calibration;
pub mod dataset;
pub mod discretize;
pub mod error;
pub mod info;
pub mod metrics;
pub mod models;
pub mod seeding;
pub mod split;
pub mod synth;

pub use audit::{
    compute_utility, cross_val_predict, detect_conditioned, detect_unconditioned, plan_folds,
    run_audit, run_utility, AttributeAudit, AuditConfig, AuditReport, CvPrediction, Detection,
    DirectionMode, FamilyDetectability, FoldPlan, Utility, UtilityReport, UtilityRow,
};
pub use calibration::{
    inject_synthetic, inject_synthetic_with, make_counterfactual, run_calibration, ArtifactMode,
    CalibrationConfig, CalibrationCurve, CalibrationFailure, CalibrationRow, ARTIFACT_COLUMN,
};
pub use dataset::{
    encode_features, load_csv, CategoricalSeries, ColumnKind, ColumnRole, ColumnSchema, Dataset,
    DatasetFingerprint, EncodedFeatures, FeatureBlock, FeatureMeta, RawColumn,
};
pub use discretize::{discretize, fd_bins, fixed_width_bins, merge_rare, BinningSpec};
pub use error::AuditError;
pub use info::{
    adjusted_mi, adjusted_mi_with, contingency, entropy, expected_mi, mutual_information,
    AmiScore, ContingencyTable, Normalization,
};
pub use metrics::{accuracy, auc, basic_bootstrap_ci, macro_f1, spearman};
pub use models::{
    fit, BayesHyper, FamilyHyper, FittedModel, LogisticHyper, MlpHyper, ModelFamily,
    PredictorSpec, TreeHyper,
};
pub use split::{correlate_detectability, split_probe, train_task_model, ProbeResult};
pub use synth::{
    binary_entropy, chain_dataset, chain_ground_truth, collider_dataset, collider_ground_truth,
    noise_features, planted_attribute_suite, sample_joint, wide_tabular, ChannelSpec, GroundTruth,
    JointSpec,
};
