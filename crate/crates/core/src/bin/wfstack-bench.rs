use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use wfstack::bench::{
    compare_implementations, comparison_table, run_benchmark, BenchConfig, Implementation,
    WindowConfig,
};
use wfstack::lincheck::{parse_histories, write_histories, Checker, Verdict};
use wfstack::CleanupMode;

/// Benchmark and audit the wait-free stack and its baselines.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Stack implementation: wf, treiber or lock.
    #[arg(long = "impl", default_value = "wf")]
    implementation: Implementation,
    #[arg(long, default_value_t = 4)]
    threads: usize,
    /// Operations per thread.
    #[arg(long, default_value_t = 100_000)]
    ops: u64,
    #[arg(long, default_value_t = 0.5)]
    push_ratio: f64,
    #[arg(long, default_value_t = wfstack::DEFAULT_W)]
    w: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// paper or corrected.
    #[arg(long, default_value = "corrected")]
    cleanup_mode: CleanupMode,
    /// Record windows of at most K operations and check each one.
    #[arg(long, value_name = "K")]
    record_history: Option<usize>,
    /// Number of recorded windows.
    #[arg(long, default_value_t = 1000)]
    windows: usize,
    /// Stop all threads when the first one finishes.
    #[arg(long)]
    stop_on_first: bool,
    /// Stop the workload after this many seconds.
    #[arg(long, value_name = "SECS")]
    duration_cap: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Write per-thread counts as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write every recorded window to this history file.
    #[arg(long, value_name = "PATH")]
    dump_history: Option<PathBuf>,
    /// Re-check a dumped history file and exit.
    #[arg(long, value_name = "PATH")]
    check: Option<PathBuf>,
    /// Run every implementation with the same seed and print a table.
    #[arg(long)]
    table: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<bool, Box<dyn std::error::Error>> {
    if let Some(path) = &args.check {
        return check_file(path);
    }
    let cfg = BenchConfig {
        implementation: args.implementation,
        threads: args.threads,
        ops_per_thread: args.ops,
        push_ratio: args.push_ratio,
        w: args.w,
        seed: args.seed,
        cleanup_mode: args.cleanup_mode,
        record_history: args
            .record_history
            .map(|k| WindowConfig::new(k, args.windows)),
        duration_cap_secs: args.duration_cap,
        stop_on_first: args.stop_on_first,
        ..Default::default()
    };

    if args.table {
        let reports = compare_implementations(&cfg)?;
        print!("{}", comparison_table(&reports));
        let ok = reports.iter().all(|r| r.passed());
        for r in reports.iter().filter(|r| !r.passed()) {
            for a in r.failures() {
                eprintln!(
                    "{}: audit {} failed: {}",
                    r.implementation, a.name, a.detail
                );
            }
        }
        return Ok(ok);
    }

    let run = run_benchmark(&cfg)?;
    let report = &run.report;
    match &args.report {
        Some(path) => std::fs::write(path, report.to_json())?,
        None => println!("{}", report.to_json()),
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, report.per_thread_csv())?;
    }
    if let Some(path) = &args.dump_history {
        std::fs::write(path, write_histories(&run.histories))?;
    }
    for a in report.failures() {
        eprintln!("audit {} failed: {}", a.name, a.detail);
    }
    if let Some(w) = report.windows.as_ref() {
        for witness in &w.witnesses {
            eprintln!(
                "violation in window {}:\n{}",
                witness.window, witness.history
            );
        }
    }
    if !report.passed() {
        if let Some(last) = &report.last_window {
            eprintln!("last recorded window:\n{last}");
        }
    }
    Ok(report.passed())
}

fn check_file(path: &PathBuf) -> Result<bool, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let histories = parse_histories(&text)?;
    let checker = Checker::new();
    let mut violations = 0usize;
    for (i, h) in histories.iter().enumerate() {
        match checker.check(h)? {
            Verdict::Linearizable { .. } => {}
            Verdict::Violation { prefix } => {
                violations += 1;
                eprintln!(
                    "history {i} is not linearizable; minimal prefix:\n{}",
                    prefix.to_text()
                );
            }
        }
    }
    println!(
        "{} histories, {} linearizable, {violations} violations",
        histories.len(),
        histories.len() - violations
    );
    Ok(violations == 0)
}
