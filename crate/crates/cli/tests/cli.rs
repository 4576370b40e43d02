//! End-to-end tests of the compiled `attrisk` binary: exit codes, file
//! outputs, golden CSV headers, JSON round-trips, and flag precedence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attrisk_core::AuditReport;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_attrisk"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(cmd: &mut Command, expected_code: i32) -> String {
    let out = cmd.output().expect("binary runs");
    assert_eq!(
        out.status.code(),
        Some(expected_code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Balanced binary label; `site` tracks it through a 15% flip and is
/// planted into feature x0; `noise` is independent of everything.
fn write_planted_csv(path: &Path, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("x0,x1,site,noise,y\n");
    for _ in 0..n {
        let y = u32::from(rng.random::<f64>() < 0.5);
        let site = y ^ u32::from(rng.random::<f64>() < 0.15);
        let noise = u32::from(rng.random::<f64>() < 0.5);
        let x0 = f64::from(site) + 0.3 * (rng.random::<f64>() - 0.5);
        let x1 = rng.random::<f64>();
        csv.push_str(&format!("{x0:.6},{x1:.6},s{site},n{noise},c{y}\n"));
    }
    fs::write(path, csv).unwrap();
}

const SCHEMA: &str = r#"
[[data.schema]]
name = "x0"
role = "feature"
kind = "continuous"

[[data.schema]]
name = "x1"
role = "feature"
kind = "continuous"

[[data.schema]]
name = "site"
role = "attribute"
kind = "categorical"

[[data.schema]]
name = "noise"
role = "attribute"
kind = "categorical"

[[data.schema]]
name = "y"
role = "label"
kind = "categorical"
"#;

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let body = format!(
        "direction = \"causal\"\nseed = 7\nmodels = [\"logistic_regression\", \"decision_tree\"]\n\n\
[bootstrap]\nreplicates = 50\n\n[rare_merge]\nmin_count = 10\n\n\
[data]\npath = \"data.csv\"\n{SCHEMA}\n{extra}"
    );
    let path = dir.join("audit.toml");
    fs::write(&path, body).unwrap();
    path
}

fn setup(n: usize, seed: u64, extra: &str) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    write_planted_csv(&dir.path().join("data.csv"), n, seed);
    let config = write_config(dir.path(), extra);
    (dir, config)
}

#[test]
fn audit_writes_all_outputs_and_ranks_planted_first() {
    let (dir, config) = setup(600, 3, "");
    let out_dir = dir.path().join("out");
    run_ok(bin().args(["audit", "--config"]).arg(&config).arg("--out").arg(&out_dir));

    let json_bytes = fs::read(out_dir.join("report.json")).unwrap();
    let report: AuditReport = serde_json::from_slice(&json_bytes).unwrap();
    // byte round-trip: parse → re-serialize reproduces the file exactly
    let mut reserialized = serde_json::to_vec_pretty(&report).unwrap();
    reserialized.push(b'\n');
    assert_eq!(json_bytes, reserialized);

    assert_eq!(report.attributes.len(), 2);
    assert_eq!(report.attributes[0].name, "site");
    assert!(report.attributes[0].detectability_ensemble > 0.5);
    assert!(report.attributes[0].utility.ami > 0.2);
    assert!(report.attributes[1].utility.ami.abs() < 0.1);

    let csv = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "attribute,utility_ami,utility_mi_nats,utility_ci_low,utility_ci_high,\
detectability_logistic_regression,detectability_decision_tree,detectability_ensemble,\
n_used,mode,warnings"
    );
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("site,"));

    let svg = fs::read_to_string(out_dir.join("scatter.svg")).unwrap();
    assert!(svg.contains("data-name=\"site\""));
    assert!(svg.contains("data-name=\"noise\""));
}

#[test]
fn audit_is_byte_deterministic_across_runs() {
    let (dir, config) = setup(300, 5, "");
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_ok(bin().args(["audit", "--config"]).arg(&config).arg("--out").arg(&out_a));
    run_ok(bin().args(["audit", "--config"]).arg(&config).arg("--out").arg(&out_b));
    assert_eq!(
        fs::read(out_a.join("report.json")).unwrap(),
        fs::read(out_b.join("report.json")).unwrap()
    );
    // a different seed must actually flow through
    let out_c = dir.path().join("c");
    run_ok(
        bin().args(["audit", "--config"]).arg(&config)
            .args(["--seed", "8"]).arg("--out").arg(&out_c),
    );
    assert_ne!(
        fs::read(out_a.join("report.json")).unwrap(),
        fs::read(out_c.join("report.json")).unwrap()
    );
}

#[test]
fn utility_subcommand_trains_nothing_and_writes_csv() {
    let (dir, config) = setup(400, 11, "");
    let out_dir = dir.path().join("out");
    run_ok(bin().args(["utility", "--config"]).arg(&config).arg("--out").arg(&out_dir));
    let csv = fs::read_to_string(out_dir.join("utility.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "attribute,utility_ami,utility_mi_nats,utility_ci_low,utility_ci_high,n_used,warnings"
    );
    assert!(csv.lines().nth(1).unwrap().starts_with("site,"));
    assert!(out_dir.join("utility.json").exists());
    assert!(!out_dir.join("report.json").exists());
}

#[test]
fn missing_required_keys_exit_2_and_are_listed_together() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("audit.toml");
    fs::write(&config, "seed = 1\n").unwrap();
    let stderr = run_err(bin().args(["audit", "--config"]).arg(&config), 2);
    for key in ["data.path", "data.schema", "direction"] {
        assert!(stderr.contains(key), "missing {key} in: {stderr}");
    }
}

#[test]
fn unknown_config_key_exits_2() {
    let (dir, _) = setup(100, 1, "");
    let config = dir.path().join("bad.toml");
    let body = fs::read_to_string(dir.path().join("audit.toml")).unwrap();
    fs::write(&config, format!("fodls = 3\n{body}")).unwrap();
    let stderr = run_err(bin().args(["audit", "--config"]).arg(&config), 2);
    assert!(stderr.contains("fodls"), "{stderr}");
}

#[test]
fn missing_data_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "");
    let stderr = run_err(bin().args(["audit", "--config"]).arg(&config), 2);
    assert!(stderr.contains("data.csv"), "{stderr}");
}

#[test]
fn output_dir_precedence_flag_over_env_over_config() {
    let (dir, config) = setup(200, 2, "[output]\ndir = \"from_config\"\n");
    // env beats config
    let env_dir = dir.path().join("from_env");
    run_ok(
        bin().args(["utility", "--config"]).arg(&config)
            .env("ATTRISK_OUT_DIR", &env_dir),
    );
    assert!(env_dir.join("utility.csv").exists());
    assert!(!dir.path().join("from_config").exists());
    // flag beats env
    let flag_dir = dir.path().join("from_flag");
    run_ok(
        bin().args(["utility", "--config"]).arg(&config)
            .env("ATTRISK_OUT_DIR", dir.path().join("ignored"))
            .arg("--out").arg(&flag_dir),
    );
    assert!(flag_dir.join("utility.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn calibrate_writes_curve_files() {
    let (dir, config) = setup(400, 13, "[calibration]\nflip_fractions = [0.0, 0.3]\ntask_model = \"logistic_regression\"\n");
    let out_dir = dir.path().join("out");
    run_ok(bin().args(["calibrate", "--config"]).arg(&config).arg("--out").arg(&out_dir));
    let csv = fs::read_to_string(out_dir.join("curve.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "flip_fraction,utility_ami,auc_correlated,auc_counterfactual,auc_drop,ci_low_drop,ci_high_drop"
    );
    assert_eq!(csv.lines().count(), 3);
    let svg = fs::read_to_string(out_dir.join("calibration.svg")).unwrap();
    assert!(svg.contains("data-flip-fraction"));
    assert!(out_dir.join("curve.json").exists());
}

#[test]
fn split_probes_and_correlates_against_a_prior_report() {
    let (dir, config) = setup(600, 17, "[split]\ntask_model = \"mlp\"\n");
    let audit_dir = dir.path().join("audit_out");
    run_ok(bin().args(["audit", "--config"]).arg(&config).arg("--out").arg(&audit_dir));
    let split_dir = dir.path().join("split_out");
    run_ok(
        bin().args(["split", "--config"]).arg(&config)
            .arg("--report").arg(audit_dir.join("report.json"))
            .arg("--out").arg(&split_dir),
    );
    let csv = fs::read_to_string(split_dir.join("split.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "attribute,macro_f1,accuracy,chance_f1");
    // two probed attributes — correlating needs ≥ 3 shared, so no rho row
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.contains("site,"));
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(split_dir.join("split.json")).unwrap()).unwrap();
    assert_eq!(json["task_model"], "mlp");
    assert!(json["spearman_rho_vs_detectability"].is_null());
    assert_eq!(json["probes"].as_array().unwrap().len(), 2);
}

#[test]
fn generate_joint_sidecar_carries_analytic_values() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin().args(["generate", "--kind", "joint", "--rows", "500", "--seed", "4", "--out"])
            .arg(dir.path()),
    );
    let truth: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["kind"], "joint");
    let mi = truth["analytic_mi"].as_f64().unwrap();
    assert!((mi - 0.192745).abs() < 1e-6, "analytic MI {mi}");
    let csv = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(csv.lines().count(), 501);
    assert_eq!(csv.lines().next().unwrap(), "a,y");
}

#[test]
fn generate_chain_sidecar_pins_zero_conditional_mi() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin().args(["generate", "--kind", "chain", "--rows", "200", "--seed", "4", "--out"])
            .arg(dir.path()),
    );
    let truth: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["kind"], "chain");
    assert_eq!(truth["analytic_conditional_mi_a_x_given_y"].as_f64().unwrap(), 0.0);
    let csv = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn generate_channel_writes_copies_and_distractors() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        bin().args([
            "generate", "--kind", "channel", "--rows", "150", "--seed", "9",
            "--flip", "0.2", "--copies", "2", "--distractors", "1", "--out",
        ])
        .arg(dir.path()),
    );
    let csv = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x0,x1,x2,a,y");
    let truth: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["copies"], 2);
    assert!(truth["analytic_mi_per_copy"].as_f64().unwrap() > 0.0);
}

#[test]
fn generate_rejects_bad_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let stderr = run_err(
        bin().args(["generate", "--kind", "joint", "--rows", "100", "--probs", "0.5,abc", "--out"])
            .arg(dir.path()),
        2,
    );
    assert!(stderr.contains("abc"), "{stderr}");
}

#[test]
fn jobs_zero_is_rejected() {
    let (dir, config) = setup(100, 1, "");
    let _ = dir;
    let stderr = run_err(
        bin().args(["utility", "--config"]).arg(&config).args(["--jobs", "0"]),
        2,
    );
    assert!(stderr.contains("jobs"), "{stderr}");
}
