//! End-to-end integration through the public API only: CSV ingestion,
//! encoding, auditing, serialization, and dataset round-trips — the way a
//! downstream consumer of the library wires the pieces together.

use std::io::Write;

use attrisk_core::{
    chain_ground_truth, encode_features, load_csv, run_audit, run_utility, AuditConfig,
    AuditReport, ColumnKind, ColumnRole, ColumnSchema, Dataset, GroundTruth, ModelFamily,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn schema() -> Vec<ColumnSchema> {
    vec![
        ColumnSchema::new("temp", ColumnRole::Feature, ColumnKind::Continuous),
        ColumnSchema::new("flow", ColumnRole::Feature, ColumnKind::Continuous),
        ColumnSchema::new("site", ColumnRole::Attribute, ColumnKind::Categorical),
        ColumnSchema::new("shift", ColumnRole::Attribute, ColumnKind::Categorical),
        ColumnSchema::new("outcome", ColumnRole::Label, ColumnKind::Categorical),
    ]
}

/// `site` tracks the label and is planted into `temp`; `shift` is noise.
/// A few cells go missing to exercise the ingestion path.
fn write_csv(n: usize, seed: u64) -> tempfile::NamedTempFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "temp,flow,site,shift,outcome").unwrap();
    for i in 0..n {
        let y = u32::from(rng.random::<f64>() < 0.5);
        let site = y ^ u32::from(rng.random::<f64>() < 0.2);
        let shift = ["day", "night", "swing"][(rng.random::<f64>() * 3.0) as usize % 3];
        let temp = f64::from(site) + 0.4 * (rng.random::<f64>() - 0.5);
        let flow = rng.random::<f64>();
        if i % 97 == 0 {
            writeln!(file, ",{flow},s{site},{shift},c{y}").unwrap();
        } else {
            writeln!(file, "{temp},{flow},s{site},{shift},c{y}").unwrap();
        }
    }
    file.flush().unwrap();
    file
}

fn quick_config() -> AuditConfig {
    AuditConfig {
        families: vec![ModelFamily::LogisticRegression, ModelFamily::DecisionTree],
        replicates: 50,
        min_count: 10,
        seed: 3,
        ..AuditConfig::default()
    }
}

#[test]
fn csv_to_ranked_report_through_public_api() {
    let file = write_csv(800, 1);
    let ds = encode_features(load_csv(file.path(), &schema(), "").unwrap()).unwrap();
    let report = run_audit(&ds, &quick_config()).unwrap();

    assert_eq!(report.attributes.len(), 2);
    let site = &report.attributes[0];
    let shift = &report.attributes[1];
    assert_eq!(site.name, "site");
    assert!(site.utility.ami > 0.2, "planted utility {}", site.utility.ami);
    assert!(
        site.detectability_ensemble > 0.7,
        "planted detectability {}",
        site.detectability_ensemble
    );
    assert!(shift.utility.ami.abs() < 0.1, "noise utility {}", shift.utility.ami);
    assert!(
        shift.detectability_ensemble < 0.1,
        "noise detectability {}",
        shift.detectability_ensemble
    );
    // every row carries a CI for each configured family
    for row in &report.attributes {
        assert_eq!(row.detectability.len(), 2);
        for det in &row.detectability {
            assert!(det.ci_low <= det.score.ami + 1e-12);
            assert!(det.ci_high >= det.score.ami - 1e-12);
        }
    }

    // structured report survives a typed serde round-trip
    let json = serde_json::to_string_pretty(&report).unwrap();
    let back: AuditReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);

    // utility-only entry point agrees digit-for-digit with the full audit
    let utility = run_utility(&ds, &quick_config()).unwrap();
    for (lean, full) in utility.attributes.iter().zip(&report.attributes) {
        assert_eq!(lean.name, full.name);
        assert_eq!(lean.utility, full.utility);
        assert_eq!(lean.utility_ci, full.utility_ci);
    }
}

#[test]
fn library_level_determinism() {
    let file = write_csv(400, 5);
    let ds = encode_features(load_csv(file.path(), &schema(), "").unwrap()).unwrap();
    let a = serde_json::to_vec(&run_audit(&ds, &quick_config()).unwrap()).unwrap();
    let b = serde_json::to_vec(&run_audit(&ds, &quick_config()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn dataset_csv_round_trip_preserves_fingerprint() {
    let file = write_csv(300, 9);
    let ds = load_csv(file.path(), &schema(), "").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rewritten = dir.path().join("copy.csv");
    ds.write_csv(&rewritten, "").unwrap();
    let back = load_csv(&rewritten, &schema(), "").unwrap();
    assert_eq!(back.fingerprint(), ds.fingerprint());
    assert_eq!(back.n_rows(), ds.n_rows());
}

#[test]
fn ground_truth_serialization_is_kind_tagged() {
    let truth = chain_ground_truth(500, 4);
    let value: serde_json::Value = serde_json::from_str(&serde_json::to_string(&truth).unwrap()).unwrap();
    assert_eq!(value["kind"], "chain");
    assert!(value["analytic_mi_a_y"].as_f64().unwrap() > 0.0);
    let back: GroundTruth = serde_json::from_value(value).unwrap();
    match back {
        GroundTruth::Chain { n, .. } => assert_eq!(n, 500),
        other => panic!("wrong variant: {other:?}"),
    }
}

#[test]
fn encoded_features_expose_stable_shape() {
    let file = write_csv(200, 11);
    let ds: Dataset = encode_features(load_csv(file.path(), &schema(), "").unwrap()).unwrap();
    let enc = ds.features().unwrap();
    assert_eq!(enc.matrix.nrows(), 200);
    // two numeric columns, one of which gains a missing-indicator column
    assert!(enc.matrix.ncols() >= 3, "got {} columns", enc.matrix.ncols());
    assert_eq!(ds.attribute_names(), vec!["site", "shift"]);
    assert_eq!(ds.label_name(), "outcome");
}
