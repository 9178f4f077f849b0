//! The literal cleanup vote, and the violation it allows.
//!
//! In `PaperFaithful` mode a pop votes starting from the node below the one
//! it claimed. A range can then be unlinked while one of its nodes is still
//! unclaimed, so that value is lost. The sweep below finds such windows and
//! prints the shortest violating prefix of the first one.

use wfstack::bench::{run_benchmark, BenchConfig, WindowConfig};
use wfstack::CleanupMode;

fn main() {
    for mode in [CleanupMode::Corrected, CleanupMode::PaperFaithful] {
        let cfg = BenchConfig {
            threads: 3,
            ops_per_thread: 0,
            w: 2,
            seed: 9,
            cleanup_mode: mode,
            record_history: Some(WindowConfig::new(12, 1000)),
            ..Default::default()
        };
        let report = run_benchmark(&cfg).unwrap().report;
        let w = report.windows.unwrap();
        println!(
            "{mode:?}: {} windows, {} violations",
            w.windows, w.violations
        );
        if let Some(first) = w.witnesses.first() {
            println!(
                "window {} (re-check agrees: {}):\n{}",
                first.window, first.recheck_agrees, first.history
            );
        }
    }
}
