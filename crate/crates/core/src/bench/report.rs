use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::audit::Audit;
use super::config::BenchConfig;
use super::stats::StructureStats;
use super::windows::WindowSummary;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreadStats {
    pub tid: usize,
    pub ops: u64,
    pub pushes: u64,
    pub pops: u64,
    pub empty_pops: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraversalStats {
    pub pops: u64,
    /// Longest pop traversal, claimed node included.
    pub max: u64,
    pub mean: f64,
    /// W times N, for comparison with `max`.
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub samples: u64,
    pub max_sampled_ratio: f64,
    pub quiescent: StructureStats,
    /// Logical size plus W times N plus W.
    pub bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanupReport {
    pub clean_invocations: u64,
    pub unlinks: u64,
    pub full_bases: u64,
    pub max_vote: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stall {
    pub tid: usize,
    pub secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub implementation: String,
    pub elapsed_secs: f64,
    /// Operations per second over the timed workload.
    pub throughput: f64,
    pub total_ops: u64,
    pub per_thread: Vec<ThreadStats>,
    pub fairness: Option<f64>,
    pub traversal: Option<TraversalStats>,
    pub structure: Option<StructureReport>,
    pub cleanup: Option<CleanupReport>,
    pub windows: Option<WindowSummary>,
    pub audits: Vec<Audit>,
    pub stalls: Vec<Stall>,
    /// The last recorded window, attached when an audit fails.
    pub last_window: Option<String>,
}

impl BenchReport {
    pub fn passed(&self) -> bool {
        self.audits.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Audit> {
        self.audits.iter().filter(|a| !a.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per thread.
    pub fn per_thread_csv(&self) -> String {
        let mut out = String::from("impl,tid,ops,pushes,pops,empty_pops\n");
        for t in &self.per_thread {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.config.implementation, t.tid, t.ops, t.pushes, t.pops, t.empty_pops
            );
        }
        out
    }
}

/// Side-by-side summary of several runs.
pub fn comparison_table(reports: &[BenchReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<32} {:>7} {:>12} {:>14} {:>9} {:>9}",
        "implementation", "threads", "ops", "ops/sec", "fairness", "max-trav"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<32} {:>7} {:>12} {:>14.0} {:>9} {:>9}",
            r.implementation,
            r.config.threads,
            r.total_ops,
            r.throughput,
            r.fairness.map_or("-".into(), |f| format!("{f:.3}")),
            r.traversal
                .as_ref()
                .map_or("-".into(), |t| t.max.to_string()),
        );
    }
    out
}
