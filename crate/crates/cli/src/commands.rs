//! The five subcommands. Every command resolves its configuration,
//! runs the corresponding engine entry point, and writes its outputs
//! atomically. Per-item failures (one attribute, one flip fraction, one
//! probe) are reported on stderr and in the outputs but do not fail the
//! run; only configuration and data errors do.

use std::path::{Path, PathBuf};

use attrisk_core::seeding::derive_seed;
use attrisk_core::synth::{self, GroundTruth};
use attrisk_core::{
    chain_dataset, chain_ground_truth, collider_dataset, collider_ground_truth, encode_features,
    load_csv, noise_features, run_audit, run_calibration, run_utility, sample_joint, split_probe,
    train_task_model, AuditReport, ChannelSpec, Dataset, JointSpec, ModelFamily, ProbeResult,
};
use serde::Serialize;

use crate::config::{parse_config, CliConfig, OUTPUT_DIR_ENV};
use crate::output::{
    atomic_write, curve_csv, report_csv, split_csv, to_json_bytes, utility_csv,
};
use crate::svg::{curve_svg, scatter_svg};
use crate::{CliError, GenerateKind};

/// Precedence: `--out` flag, then the environment override, then the
/// config's `output.dir` (or `.` for generate, which has no config).
fn resolve_out(flag: &Option<PathBuf>, config_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    config_dir.map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<CliConfig, CliError> {
    let mut config = parse_config(path)?;
    if let Some(seed) = seed {
        config.override_seed(seed);
    }
    Ok(config)
}

fn load_dataset(config: &CliConfig) -> Result<Dataset, CliError> {
    let ds = load_csv(&config.data_path, &config.schema, &config.missing_token)?;
    Ok(encode_features(ds)?)
}

fn read_report(path: &Path) -> Result<AuditReport, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{} is not an audit report: {e}", path.display())))
}

pub fn cmd_audit(
    config_path: &Path,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let out_dir = resolve_out(out, Some(&config.output_dir));
    let ds = load_dataset(&config)?;
    let report = run_audit(&ds, &config.audit)?;

    atomic_write(&out_dir.join("report.json"), &to_json_bytes(&report)?)?;
    atomic_write(&out_dir.join("report.csv"), report_csv(&report).as_bytes())?;
    atomic_write(&out_dir.join("scatter.svg"), scatter_svg(&report).as_bytes())?;

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let failed: Vec<&str> = report
        .attributes
        .iter()
        .filter(|a| a.error.is_some())
        .map(|a| a.name.as_str())
        .collect();
    if !failed.is_empty() {
        eprintln!(
            "warning: {} attribute(s) could not be audited: {}",
            failed.len(),
            failed.join(", ")
        );
    }
    println!(
        "audited {} attributes over {} rows ({} mode)",
        report.attributes.len(),
        ds.n_rows(),
        report.config.mode.name()
    );
    for a in report.attributes.iter().filter(|a| a.error.is_none()).take(5) {
        println!(
            "  {:<24} utility {:>7.4}  detectability {:>7.4}",
            a.name, a.utility.ami, a.detectability_ensemble
        );
    }
    println!(
        "wrote {}, report.csv, scatter.svg",
        out_dir.join("report.json").display()
    );
    Ok(())
}

pub fn cmd_utility(
    config_path: &Path,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let out_dir = resolve_out(out, Some(&config.output_dir));
    let ds = load_dataset(&config)?;
    let report = run_utility(&ds, &config.audit)?;

    atomic_write(&out_dir.join("utility.json"), &to_json_bytes(&report)?)?;
    atomic_write(&out_dir.join("utility.csv"), utility_csv(&report).as_bytes())?;

    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    println!("scored {} attributes (no models trained)", report.attributes.len());
    for row in report.attributes.iter().filter(|r| r.error.is_none()).take(5) {
        println!("  {:<24} utility {:>7.4}", row.name, row.utility.ami);
    }
    println!("wrote {}, utility.csv", out_dir.join("utility.json").display());
    Ok(())
}

pub fn cmd_calibrate(
    config_path: &Path,
    seed: Option<u64>,
    out: &Option<PathBuf>,
    markers_from: &Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let out_dir = resolve_out(out, Some(&config.output_dir));
    let ds = load_dataset(&config)?;
    let curve = run_calibration(&ds, &config.calibration)?;

    let markers: Vec<(String, f64)> = match markers_from {
        Some(path) => read_report(path)?
            .attributes
            .iter()
            .filter(|a| a.error.is_none())
            .map(|a| (a.name.clone(), a.utility.ami))
            .collect(),
        None => Vec::new(),
    };

    atomic_write(&out_dir.join("curve.json"), &to_json_bytes(&curve)?)?;
    atomic_write(&out_dir.join("curve.csv"), curve_csv(&curve).as_bytes())?;
    atomic_write(
        &out_dir.join("calibration.svg"),
        curve_svg(&curve, &markers).as_bytes(),
    )?;

    for warning in &curve.warnings {
        eprintln!("warning: {warning}");
    }
    for failure in &curve.failures {
        eprintln!(
            "warning: flip fraction {} failed: {}",
            failure.flip_fraction, failure.error
        );
    }
    println!(
        "calibrated {} flip fractions with a {} task model",
        curve.rows.len(),
        curve.task_family
    );
    for row in &curve.rows {
        println!(
            "  flip {:>5.2}  utility {:>7.4}  auc drop {:>7.4}",
            row.flip_fraction, row.utility.ami, row.auc_drop
        );
    }
    println!("wrote {}, curve.csv, calibration.svg", out_dir.join("curve.json").display());
    Ok(())
}

#[derive(Serialize)]
struct SplitReport<'a> {
    task_model: ModelFamily,
    folds: usize,
    seed: u64,
    probes: &'a [ProbeResult],
    spearman_rho_vs_detectability: Option<f64>,
}

pub fn cmd_split(
    config_path: &Path,
    seed: Option<u64>,
    out: &Option<PathBuf>,
    report_from: &Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(config_path, seed)?;
    let out_dir = resolve_out(out, Some(&config.output_dir));
    let ds = load_dataset(&config)?;

    let (model, task_warnings) =
        train_task_model(&ds, config.split.task_model, config.audit.seed)?;
    for warning in &task_warnings {
        eprintln!("warning: task model: {warning}");
    }

    let names: Vec<String> = match &config.split.attributes {
        Some(list) => list.clone(),
        None => ds.attribute_names().iter().map(|s| s.to_string()).collect(),
    };
    let mut probes = Vec::new();
    for name in &names {
        match split_probe(&model, &ds, name, config.split.folds, config.audit.seed) {
            Ok(probe) => probes.push(probe),
            Err(e) => eprintln!("warning: probe for {name:?} failed: {e}"),
        }
    }

    let rho = match report_from {
        Some(path) => {
            let audit = read_report(path)?;
            match attrisk_core::correlate_detectability(&audit, &probes) {
                Ok(rho) => Some(rho),
                Err(e) => {
                    eprintln!("warning: cannot correlate against {}: {e}", path.display());
                    None
                }
            }
        }
        None => None,
    };

    atomic_write(&out_dir.join("split.csv"), split_csv(&probes, rho).as_bytes())?;
    atomic_write(
        &out_dir.join("split.json"),
        &to_json_bytes(&SplitReport {
            task_model: config.split.task_model,
            folds: config.split.folds,
            seed: config.audit.seed,
            probes: &probes,
            spearman_rho_vs_detectability: rho,
        })?,
    )?;

    println!(
        "probed {} attributes on a frozen {} representation",
        probes.len(),
        config.split.task_model
    );
    for probe in &probes {
        println!(
            "  {:<24} macro-F1 {:>6.4}  chance {:>6.4}",
            probe.attribute, probe.macro_f1, probe.chance_f1
        );
    }
    if let Some(rho) = rho {
        println!("Spearman rho vs audit detectability: {rho:.4}");
    }
    println!("wrote {}, split.json", out_dir.join("split.csv").display());
    Ok(())
}

fn parse_probs(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        CliError::Config(format!(
                            "--probs cell {:?} is not a number (expected e.g. \"0.4,0.1;0.1,0.4\")",
                            cell.trim()
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

/// Write a dataset CSV atomically via a hidden sibling, matching the
/// report writers.
fn write_dataset_csv(ds: &Dataset, path: &Path) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    let tmp = path.with_extension("csv.tmp");
    ds.write_csv(&tmp, "")?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_generate(
    kind: GenerateKind,
    rows: usize,
    seed: u64,
    out: &Option<PathBuf>,
    probs: &Option<String>,
    flip: f64,
    copies: usize,
    distractors: usize,
) -> Result<(), CliError> {
    let out_dir = resolve_out(out, None);
    let csv_path = out_dir.join("data.csv");
    let truth_path = out_dir.join("ground_truth.json");

    let truth = match kind {
        GenerateKind::Chain => {
            let ds = chain_dataset(rows, seed)?;
            write_dataset_csv(&ds, &csv_path)?;
            chain_ground_truth(rows, seed)
        }
        GenerateKind::Collider => {
            let ds = collider_dataset(rows, seed)?;
            write_dataset_csv(&ds, &csv_path)?;
            collider_ground_truth(rows, seed)
        }
        GenerateKind::Channel => {
            let spec = ChannelSpec {
                flip_probability: flip,
                copies,
                distractors,
            };
            // a balanced source bit and an independent uniform label
            let uniform = JointSpec::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]])?;
            let (a, y) = sample_joint(&uniform, rows, derive_seed(seed, &["channel", "vars"]))?;
            let x = noise_features(&a, &spec, derive_seed(seed, &["channel", "features"]))?;
            let names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
            let ds = attrisk_core::dataset::from_matrix(
                x,
                names,
                vec![("a".into(), a)],
                ("y".into(), y),
            )?;
            write_dataset_csv(&ds, &csv_path)?;
            GroundTruth::Channel {
                n: rows,
                seed,
                flip_probability: flip,
                copies,
                distractors,
                analytic_mi_per_copy: std::f64::consts::LN_2 - synth::binary_entropy(flip),
            }
        }
        GenerateKind::Joint => {
            let probabilities = match probs {
                Some(text) => parse_probs(text)?,
                None => vec![vec![0.4, 0.1], vec![0.1, 0.4]],
            };
            let spec = JointSpec::new(probabilities)?;
            let (a, y) = sample_joint(&spec, rows, seed)?;
            let mut csv = String::from("a,y\n");
            for (ac, yc) in a.codes().iter().zip(y.codes()) {
                csv.push_str(&a.category_names()[*ac as usize]);
                csv.push(',');
                csv.push_str(&y.category_names()[*yc as usize]);
                csv.push('\n');
            }
            atomic_write(&csv_path, csv.as_bytes())?;
            GroundTruth::Joint {
                n: rows,
                seed,
                analytic_mi: spec.analytic_mi(),
                analytic_h_a: spec.analytic_h_a(),
                analytic_h_y: spec.analytic_h_y(),
            }
        }
    };
    atomic_write(&truth_path, &to_json_bytes(&truth)?)?;

    println!("generated {rows} rows into {}", csv_path.display());
    println!("ground truth: {}", truth_path.display());
    Ok(())
}
