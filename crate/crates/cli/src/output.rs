//! Report serialization: atomic file writes, pinned CSV column orders,
//! and byte-stable JSON.
//!
//! The CSV column orders here are a compatibility contract — downstream
//! notebooks parse them by position — so they are pinned by golden tests
//! and must not be reordered.

use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use attrisk_core::{
    AttributeAudit, AuditReport, CalibrationCurve, ModelFamily, ProbeResult, UtilityReport,
};
use serde::Serialize;

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Write a file atomically: the bytes land in a hidden sibling first and
/// are renamed into place, so a crash mid-write never leaves a truncated
/// report behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Pretty JSON with a trailing newline. Serialization is deterministic
/// (struct fields serialize in declaration order), so equal values give
/// byte-identical files.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Quote a CSV field only when it needs it.
fn csv_field(s: &str) -> Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", s.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(s)
    }
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn warnings_cell(warnings: &[String], error: Option<&str>) -> String {
    let mut parts: Vec<String> = Vec::new();
    if let Some(e) = error {
        parts.push(format!("error: {e}"));
    }
    parts.extend(warnings.iter().cloned());
    parts.join("; ")
}

/// Column order: attribute, utility_ami, utility_mi_nats, utility_ci_low,
/// utility_ci_high, one detectability_<family> column per configured
/// family in configured order, detectability_ensemble, n_used, mode,
/// warnings.
pub fn report_csv(report: &AuditReport) -> String {
    let families = &report.config.families;
    let mut out = String::from("attribute,utility_ami,utility_mi_nats,utility_ci_low,utility_ci_high");
    for family in families {
        out.push_str(",detectability_");
        out.push_str(family.name());
    }
    out.push_str(",detectability_ensemble,n_used,mode,warnings\n");
    for row in &report.attributes {
        out.push_str(&report_csv_row(row, families));
        out.push('\n');
    }
    out
}

fn report_csv_row(row: &AttributeAudit, families: &[ModelFamily]) -> String {
    let mut fields: Vec<String> = vec![
        csv_field(&row.name).into_owned(),
        num(row.utility.ami),
        num(row.utility.mi),
        num(row.utility_ci.0),
        num(row.utility_ci.1),
    ];
    for family in families {
        let cell = row
            .detectability
            .iter()
            .find(|d| d.family == *family)
            .map(|d| num(d.score.ami))
            .unwrap_or_default();
        fields.push(cell);
    }
    fields.push(num(row.detectability_ensemble));
    fields.push(row.n_used.to_string());
    fields.push(row.mode.name().to_string());
    fields.push(
        csv_field(&warnings_cell(&row.warnings, row.error.as_deref())).into_owned(),
    );
    fields.join(",")
}

/// Column order: attribute, utility_ami, utility_mi_nats, utility_ci_low,
/// utility_ci_high, n_used, warnings.
pub fn utility_csv(report: &UtilityReport) -> String {
    let mut out =
        String::from("attribute,utility_ami,utility_mi_nats,utility_ci_low,utility_ci_high,n_used,warnings\n");
    for row in &report.attributes {
        let fields = [
            csv_field(&row.name).into_owned(),
            num(row.utility.ami),
            num(row.utility.mi),
            num(row.utility_ci.0),
            num(row.utility_ci.1),
            row.n_used.to_string(),
            csv_field(&warnings_cell(&row.warnings, row.error.as_deref())).into_owned(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Column order: flip_fraction, utility_ami, auc_correlated,
/// auc_counterfactual, auc_drop, ci_low_drop, ci_high_drop.
pub fn curve_csv(curve: &CalibrationCurve) -> String {
    let mut out = String::from(
        "flip_fraction,utility_ami,auc_correlated,auc_counterfactual,auc_drop,ci_low_drop,ci_high_drop\n",
    );
    for row in &curve.rows {
        let fields = [
            num(row.flip_fraction),
            num(row.utility.ami),
            num(row.auc_correlated),
            num(row.auc_counterfactual),
            num(row.auc_drop),
            num(row.ci_drop.0),
            num(row.ci_drop.1),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Column order: attribute, macro_f1, accuracy, chance_f1. When a
/// correlation against a prior audit is available it is appended as one
/// final row named `spearman_rho_vs_detectability` with the coefficient
/// in the macro_f1 column.
pub fn split_csv(probes: &[ProbeResult], rho: Option<f64>) -> String {
    let mut out = String::from("attribute,macro_f1,accuracy,chance_f1\n");
    for probe in probes {
        let fields = [
            csv_field(&probe.attribute).into_owned(),
            num(probe.macro_f1),
            num(probe.accuracy),
            num(probe.chance_f1),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    if let Some(rho) = rho {
        out.push_str(&format!("spearman_rho_vs_detectability,{},,\n", num(rho)));
    }
    out
}
