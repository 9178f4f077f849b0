//! The generic stack property suite, run on every implementation.

use wfstack::bench::{run_benchmark, BenchConfig, Implementation, WindowConfig};
use wfstack::CleanupMode;

fn audit_names_failing(cfg: &BenchConfig) -> Vec<String> {
    let run = run_benchmark(cfg).unwrap();
    run.report
        .failures()
        .map(|a| format!("{}: {}", a.name, a.detail))
        .collect()
}

#[test]
fn every_implementation_conserves_values() {
    for implementation in Implementation::ALL {
        let cfg = BenchConfig {
            implementation,
            threads: 4,
            ops_per_thread: 1000,
            seed: 21,
            ..Default::default()
        };
        let failing = audit_names_failing(&cfg);
        assert!(
            failing.iter().all(|f| f.starts_with("structural-bound")),
            "{implementation}: {failing:?}"
        );
    }
}

#[test]
fn push_only_run_keeps_every_node() {
    let cfg = BenchConfig {
        threads: 4,
        ops_per_thread: 2000,
        push_ratio: 1.0,
        w: 4,
        ..Default::default()
    };
    let report = run_benchmark(&cfg).unwrap().report;
    assert!(report.passed(), "{:#?}", report.audits);
    let st = report.structure.unwrap();
    assert_eq!(st.quiescent.physical_len, 8000);
    assert_eq!(report.cleanup.unwrap().clean_invocations, 0);
}

#[test]
fn treiber_windows_are_linearizable() {
    let cfg = BenchConfig {
        implementation: Implementation::Treiber,
        threads: 3,
        ops_per_thread: 0,
        record_history: Some(WindowConfig::new(12, 300)),
        ..Default::default()
    };
    let report = run_benchmark(&cfg).unwrap().report;
    let w = report.windows.unwrap();
    assert_eq!((w.windows, w.violations), (300, 0));
}

#[test]
fn narrow_ranges_under_churn() {
    for seed in 0..4 {
        let cfg = BenchConfig {
            threads: 4,
            ops_per_thread: 20_000,
            w: 2,
            seed,
            push_ratio: 0.5,
            cleanup_mode: CleanupMode::Corrected,
            sample_shift: 8,
            ..Default::default()
        };
        let failing = audit_names_failing(&cfg);
        assert!(
            failing.iter().all(|f| f.starts_with("structural-bound")),
            "seed {seed}: {failing:?}"
        );
    }
}

#[test]
fn stop_on_first_leaves_partial_counts() {
    let cfg = BenchConfig {
        threads: 4,
        ops_per_thread: 50_000,
        stop_on_first: true,
        ..Default::default()
    };
    let report = run_benchmark(&cfg).unwrap().report;
    let max = report.per_thread.iter().map(|t| t.ops).max().unwrap();
    assert_eq!(max, 50_000);
    let f = report.fairness.unwrap();
    assert!(f > 0.0 && f <= 1.0);
    assert_eq!(
        report.total_ops,
        report.per_thread.iter().map(|t| t.ops).sum::<u64>()
    );
}
