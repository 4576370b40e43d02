//! Strict TOML configuration.
//!
//! Unknown keys are rejected (typo safety), every missing required key is
//! reported in a single message, and everything optional has a documented
//! default. Relative paths in the file resolve against the config file's
//! own directory, so a config travels with its data.

use std::path::{Path, PathBuf};

use attrisk_core::models::PredictorSpec;
use attrisk_core::{
    ArtifactMode, AuditConfig, CalibrationConfig, ColumnKind, ColumnRole, ColumnSchema,
    DirectionMode, ModelFamily, Normalization,
};
use serde::Deserialize;

use crate::CliError;

/// Output directory used when neither the config, the environment, nor
/// `--out` names one.
pub const DEFAULT_OUTPUT_DIR: &str = "attrisk-out";

/// Environment variable that overrides the config's output directory
/// (itself overridden by `--out`).
pub const OUTPUT_DIR_ENV: &str = "ATTRISK_OUT_DIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    data: Option<RawData>,
    direction: Option<String>,
    attributes: Option<Vec<String>>,
    models: Option<Vec<String>>,
    folds: Option<usize>,
    seed: Option<u64>,
    normalization: Option<String>,
    bootstrap: Option<RawBootstrap>,
    rare_merge: Option<RawRareMerge>,
    output: Option<RawOutput>,
    calibration: Option<RawCalibration>,
    split: Option<RawSplit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    path: Option<PathBuf>,
    schema: Option<Vec<RawColumn>>,
    missing_token: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumn {
    name: Option<String>,
    role: Option<String>,
    kind: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBootstrap {
    replicates: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRareMerge {
    min_count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    flip_fractions: Option<Vec<f64>>,
    task_model: Option<String>,
    folds: Option<usize>,
    artifact_mode: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    task_model: Option<String>,
    attributes: Option<Vec<String>>,
    folds: Option<usize>,
}

/// Settings for the representation-probe command.
#[derive(Debug, Clone)]
pub struct SplitSettings {
    pub task_model: ModelFamily,
    /// `None` probes every attribute column.
    pub attributes: Option<Vec<String>>,
    pub folds: usize,
}

/// A fully validated configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub data_path: PathBuf,
    pub schema: Vec<ColumnSchema>,
    pub missing_token: String,
    pub audit: AuditConfig,
    pub output_dir: PathBuf,
    pub calibration: CalibrationConfig,
    pub split: SplitSettings,
}

impl CliConfig {
    /// Apply a command-line seed override to every seeded component.
    pub fn override_seed(&mut self, seed: u64) {
        self.audit.seed = seed;
        self.calibration.seed = seed;
    }
}

fn parse_direction(value: &str) -> Result<DirectionMode, String> {
    match value {
        "causal" | "causal_x_to_y" => Ok(DirectionMode::CausalXToY),
        "anticausal" | "anticausal_y_to_x" => Ok(DirectionMode::AnticausalYToX),
        other => Err(format!(
            "direction must be \"causal\" or \"anticausal\", got {other:?}"
        )),
    }
}

fn parse_family(field: &str, value: &str) -> Result<ModelFamily, String> {
    ModelFamily::from_name(value).ok_or_else(|| {
        let valid: Vec<&str> = ModelFamily::ALL.iter().map(|f| f.name()).collect();
        format!("{field} must be one of {valid:?}, got {value:?}")
    })
}

fn parse_role(field: &str, value: &str) -> Result<ColumnRole, String> {
    match value {
        "feature" => Ok(ColumnRole::Feature),
        "attribute" => Ok(ColumnRole::Attribute),
        "label" => Ok(ColumnRole::Label),
        "ignore" => Ok(ColumnRole::Ignore),
        other => Err(format!(
            "{field} must be \"feature\", \"attribute\", \"label\", or \"ignore\", got {other:?}"
        )),
    }
}

fn parse_kind(field: &str, value: &str) -> Result<ColumnKind, String> {
    match value {
        "continuous" => Ok(ColumnKind::Continuous),
        "categorical" => Ok(ColumnKind::Categorical),
        other => Err(format!(
            "{field} must be \"continuous\" or \"categorical\", got {other:?}"
        )),
    }
}

fn parse_normalization(value: &str) -> Result<Normalization, String> {
    match value {
        "max" => Ok(Normalization::Max),
        "mean" => Ok(Normalization::Mean),
        other => Err(format!(
            "normalization must be \"max\" or \"mean\", got {other:?}"
        )),
    }
}

fn parse_artifact_mode(value: &str) -> Result<ArtifactMode, String> {
    match value {
        "encode_value" => Ok(ArtifactMode::EncodeValue),
        "mark_flipped" => Ok(ArtifactMode::MarkFlipped),
        other => Err(format!(
            "calibration.artifact_mode must be \"encode_value\" or \"mark_flipped\", got {other:?}"
        )),
    }
}

/// Resolve a possibly relative path against the config file's directory.
fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

/// Read and validate a config file. All missing required keys are listed
/// in one message; all value-level problems are likewise collected before
/// reporting, so one round of fixes suffices.
pub fn parse_config(path: &Path) -> Result<CliConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| {
        CliError::Config(format!("config {}: {}", path.display(), e.message()))
    })?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    build(raw, &base).map_err(|msg| CliError::Config(format!("config {}: {msg}", path.display())))
}

fn build(raw: RawConfig, base: &Path) -> Result<CliConfig, String> {
    let mut missing: Vec<&str> = Vec::new();
    let mut problems: Vec<String> = Vec::new();

    let (data_path, schema_raw, missing_token) = match raw.data {
        Some(data) => {
            if data.path.is_none() {
                missing.push("data.path");
            }
            if data.schema.as_ref().map_or(true, |s| s.is_empty()) {
                missing.push("data.schema");
            }
            (data.path, data.schema, data.missing_token)
        }
        None => {
            missing.push("data.path");
            missing.push("data.schema");
            (None, None, None)
        }
    };
    if raw.direction.is_none() {
        missing.push("direction");
    }
    if !missing.is_empty() {
        return Err(format!(
            "missing required keys: {}",
            missing.join(", ")
        ));
    }

    let mut schema = Vec::new();
    for (i, col) in schema_raw.unwrap_or_default().into_iter().enumerate() {
        let name = match col.name {
            Some(n) if !n.is_empty() => Some(n),
            _ => {
                problems.push(format!("data.schema[{i}].name is missing"));
                None
            }
        };
        let role = match col.role.as_deref() {
            Some(r) => parse_role(&format!("data.schema[{i}].role"), r)
                .map_err(|e| problems.push(e))
                .ok(),
            None => {
                problems.push(format!("data.schema[{i}].role is missing"));
                None
            }
        };
        let kind = match col.kind.as_deref() {
            Some(k) => parse_kind(&format!("data.schema[{i}].kind"), k)
                .map_err(|e| problems.push(e))
                .ok(),
            None => {
                problems.push(format!("data.schema[{i}].kind is missing"));
                None
            }
        };
        if let (Some(name), Some(role), Some(kind)) = (name, role, kind) {
            schema.push(ColumnSchema::new(name, role, kind));
        }
    }

    let mode = match parse_direction(raw.direction.as_deref().unwrap_or_default()) {
        Ok(m) => m,
        Err(e) => {
            problems.push(e);
            DirectionMode::CausalXToY
        }
    };

    let families = match raw.models {
        Some(names) => {
            let mut families = Vec::new();
            for name in &names {
                match parse_family("models", name) {
                    Ok(f) => families.push(f),
                    Err(e) => problems.push(e),
                }
            }
            families
        }
        None => ModelFamily::ALL.to_vec(),
    };

    let normalization = match raw.normalization.as_deref() {
        Some(value) => match parse_normalization(value) {
            Ok(n) => n,
            Err(e) => {
                problems.push(e);
                Normalization::Max
            }
        },
        None => Normalization::Max,
    };

    let folds = raw.folds.unwrap_or(3);
    let seed = raw.seed.unwrap_or(0);
    let audit = AuditConfig {
        attributes: raw.attributes,
        families,
        folds,
        replicates: raw.bootstrap.and_then(|b| b.replicates).unwrap_or(1000),
        min_count: raw.rare_merge.and_then(|r| r.min_count).unwrap_or(100),
        mode,
        normalization,
        seed,
    };
    if problems.is_empty() {
        // field-level errors would make these misleading duplicates
        if let Err(e) = audit.validate() {
            problems.push(e.to_string());
        }
    }

    let mut calibration = CalibrationConfig {
        folds,
        seed,
        ..CalibrationConfig::default()
    };
    let mut split = SplitSettings {
        task_model: ModelFamily::Mlp,
        attributes: None,
        folds,
    };
    if let Some(raw_cal) = raw.calibration {
        if let Some(fractions) = raw_cal.flip_fractions {
            calibration.flip_fractions = fractions;
        }
        if let Some(name) = raw_cal.task_model.as_deref() {
            match parse_family("calibration.task_model", name) {
                Ok(f) => calibration.task_model = PredictorSpec::with_defaults(f, 0),
                Err(e) => problems.push(e),
            }
        }
        if let Some(k) = raw_cal.folds {
            calibration.folds = k;
        }
        if let Some(mode) = raw_cal.artifact_mode.as_deref() {
            match parse_artifact_mode(mode) {
                Ok(m) => calibration.artifact_mode = m,
                Err(e) => problems.push(e),
            }
        }
        if problems.is_empty() {
            if let Err(e) = calibration.validate() {
                problems.push(e.to_string());
            }
        }
    }
    if let Some(raw_split) = raw.split {
        if let Some(name) = raw_split.task_model.as_deref() {
            match parse_family("split.task_model", name) {
                Ok(f) => split.task_model = f,
                Err(e) => problems.push(e),
            }
        }
        split.attributes = raw_split.attributes;
        if let Some(k) = raw_split.folds {
            split.folds = k;
        }
        if split.folds < 2 {
            problems.push(format!(
                "split.folds must be at least 2, got {}",
                split.folds
            ));
        }
    }

    if !problems.is_empty() {
        return Err(problems.join("; "));
    }

    let output_dir = resolve(
        base,
        &raw.output
            .and_then(|o| o.dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
    );

    Ok(CliConfig {
        data_path: resolve(base, &data_path.expect("checked above")),
        schema,
        missing_token: missing_token.unwrap_or_default(),
        audit,
        output_dir,
        calibration,
        split,
    })
}
