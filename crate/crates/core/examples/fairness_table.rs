//! Throughput and fairness of all three stacks from one seed.
//!
//! Runs stop as soon as the first thread finishes its quota, so fairness
//! (mean over max completed ops) reflects how evenly threads progressed.

use wfstack::bench::{compare_implementations, comparison_table, BenchConfig};

fn main() {
    let cfg = BenchConfig {
        threads: 4,
        ops_per_thread: 200_000,
        seed: 1,
        stop_on_first: true,
        ..Default::default()
    };
    let reports = compare_implementations(&cfg).unwrap();
    print!("{}", comparison_table(&reports));
    for r in &reports {
        let ops: Vec<u64> = r.per_thread.iter().map(|t| t.ops).collect();
        println!("{:<32} per-thread ops {ops:?}", r.implementation);
    }
}
