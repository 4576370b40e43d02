//! Hot-path benchmarks: information estimators, model fits, and the
//! end-to-end audit. Run with `cargo bench -p attrisk-bench`.

use std::hint::black_box;

use attrisk_bench::{associated_pair, tabular_dataset};
use attrisk_core::{
    adjusted_mi, compute_utility, contingency, entropy, expected_mi, mutual_information,
    run_audit, split_probe, train_task_model, AuditConfig, ModelFamily, Normalization,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn bench_information(c: &mut Criterion) {
    let mut group = c.benchmark_group("information");

    let counts: Vec<u64> = (1..=64).collect();
    group.bench_function("entropy_64_categories", |b| {
        b.iter(|| entropy(black_box(&counts)).unwrap())
    });

    let (a, y) = associated_pair(8, 5_000, 1);
    let table = contingency(a.codes(), 8, y.codes(), 8).unwrap();
    group.bench_function("mutual_information_8x8", |b| {
        b.iter(|| mutual_information(black_box(&table)))
    });
    group.bench_function("expected_mi_8x8_n5000", |b| {
        b.iter(|| expected_mi(black_box(table.row_marginals()), black_box(table.col_marginals())).unwrap())
    });
    group.bench_function("adjusted_mi_8x8_n5000", |b| {
        b.iter(|| adjusted_mi(black_box(&table)).unwrap())
    });

    group.finish();
}

fn bench_model_fits(c: &mut Criterion) {
    let mut group = c.benchmark_group("model_fits");
    group.sample_size(10);
    let ds = tabular_dataset(2_000, 10, 3, 2);
    for family in ModelFamily::ALL {
        group.bench_function(format!("train_{family}_2000x10"), |b| {
            b.iter(|| train_task_model(black_box(&ds), family, 7).unwrap())
        });
    }
    group.finish();
}

fn bench_audit(c: &mut Criterion) {
    let mut group = c.benchmark_group("audit");
    group.sample_size(10);

    let (a, y) = associated_pair(4, 2_000, 3);
    group.bench_function("utility_bootstrap_200", |b| {
        b.iter(|| compute_utility(black_box(&a), black_box(&y), 200, 5, Normalization::Max).unwrap())
    });

    let ds = tabular_dataset(1_000, 6, 2, 4);
    let config = AuditConfig {
        families: vec![ModelFamily::LogisticRegression, ModelFamily::DecisionTree],
        replicates: 50,
        min_count: 10,
        seed: 11,
        ..AuditConfig::default()
    };
    group.bench_function("run_audit_1000x6_two_families", |b| {
        b.iter(|| run_audit(black_box(&ds), black_box(&config)).unwrap())
    });

    let (model, _) = train_task_model(&ds, ModelFamily::Mlp, 13).unwrap();
    group.bench_function("split_probe_1000x6", |b| {
        b.iter(|| split_probe(black_box(&model), black_box(&ds), "site", 3, 17).unwrap())
    });

    group.finish();
}

criterion_group!(benches, bench_information, bench_model_fits, bench_audit);
criterion_main!(benches);
