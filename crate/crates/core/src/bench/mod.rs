//! Seeded workloads, quiescent audits, recorded windows and reports.
//!
//! ```
//! use wfstack::bench::{run_benchmark, BenchConfig};
//!
//! let cfg = BenchConfig { threads: 2, ops_per_thread: 2_000, ..Default::default() };
//! let report = run_benchmark(&cfg).unwrap().report;
//! assert!(report.fairness.unwrap() <= 1.0);
//! ```

pub mod audit;
mod config;
mod fairness;
mod instrument;
mod report;
mod run;
mod stats;
mod windows;

pub use audit::Audit;
pub use config::{BenchConfig, Implementation, WindowConfig};
pub use fairness::{compute_fairness, FairnessError};
pub use instrument::{Instrumentation, InstrumentationSnapshot};
pub use report::{
    comparison_table, BenchReport, CleanupReport, Stall, StructureReport, ThreadStats,
    TraversalStats,
};
pub use run::{compare_implementations, run_benchmark, BenchError, BenchRun};
pub use stats::{structural_bound, structure_stats, StructureStats};
pub use windows::{check_windows, run_windows, WindowRun, WindowSummary, Witness, MAX_WITNESSES};
