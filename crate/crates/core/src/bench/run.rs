use std::collections::HashSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering::Relaxed};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::audit::{self, Audit};
use super::config::{BenchConfig, Implementation};
use super::fairness::compute_fairness;
use super::instrument::Instrumentation;
use super::report::{
    BenchReport, CleanupReport, Stall, StructureReport, ThreadStats, TraversalStats,
};
use super::stats::{structural_bound, structure_stats, StructureStats};
use super::windows::{check_windows, run_windows, value, WindowRun};
use crate::baselines::{Lifo, LockedStack, TreiberStack};
use crate::error::ConfigError;
use crate::lincheck::{History, HistoryMeta, RecordError};
use crate::stack::{StackConfig, WaitFreeStack};

const WORKLOAD_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
/// Chaos yield probability for recorded windows, out of 256.
const WINDOW_CHAOS: u8 = 64;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("history recording failed: {0}")]
    Record(#[from] RecordError),
}

/// A finished run: the report and every recorded window.
#[derive(Debug)]
pub struct BenchRun {
    pub report: BenchReport,
    pub histories: Vec<History>,
}

struct Shared {
    stop: AtomicBool,
    pushes: AtomicU64,
    pops: AtomicU64,
    /// Start time of each thread's in-flight operation in ns since the run
    /// began, plus one. Zero when idle.
    in_flight: Vec<AtomicU64>,
    stalls: Mutex<Vec<Stall>>,
}

#[derive(Default)]
struct ThreadOutcome {
    stats: ThreadStats,
    pushed: Vec<u64>,
    popped: Vec<u64>,
    samples: u64,
    max_ratio: f64,
    max_counter: usize,
    chain_error: Option<String>,
}

type Sampler<'a> = dyn Fn(u64) -> Result<StructureStats, String> + Sync + 'a;

fn drive<S>(
    stack: &S,
    cfg: &BenchConfig,
    sampler: Option<&Sampler<'_>>,
) -> (Vec<ThreadOutcome>, Duration, Vec<Stall>)
where
    S: Lifo<u64> + Sync + ?Sized,
{
    let shared = Shared {
        stop: AtomicBool::new(false),
        pushes: AtomicU64::new(0),
        pops: AtomicU64::new(0),
        in_flight: (0..cfg.threads).map(|_| AtomicU64::new(0)).collect(),
        stalls: Mutex::new(Vec::new()),
    };
    let cap = cfg.duration_cap_secs.map(Duration::from_secs_f64);
    let op_cap = Duration::from_secs_f64(cfg.op_cap_secs);
    let sample_mask = (1u64 << cfg.sample_shift.min(63)) - 1;
    let done = AtomicBool::new(false);
    let start = Instant::now();

    let outcomes = std::thread::scope(|s| {
        let (shared, done) = (&shared, &done);
        // Watchdog: flags any operation that runs longer than the cap.
        s.spawn(move || {
            let mut flagged = vec![0u64; cfg.threads];
            while !done.load(Relaxed) {
                std::thread::sleep(Duration::from_millis(20));
                let now = start.elapsed().as_nanos() as u64 + 1;
                for (tid, slot) in shared.in_flight.iter().enumerate() {
                    let began = slot.load(Relaxed);
                    if began != 0 && began != flagged[tid] && now - began > op_cap.as_nanos() as u64
                    {
                        flagged[tid] = began;
                        shared.stalls.lock().unwrap().push(Stall {
                            tid,
                            secs: (now - began) as f64 / 1e9,
                        });
                    }
                }
            }
        });
        let workers: Vec<_> = (0..cfg.threads)
            .map(|tid| {
                s.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        cfg.seed ^ WORKLOAD_STREAM.wrapping_mul(tid as u64 + 1),
                    );
                    let mut out = ThreadOutcome::default();
                    out.stats.tid = tid;
                    for seq in 0..cfg.ops_per_thread {
                        if shared.stop.load(Relaxed) {
                            break;
                        }
                        if let Some(cap) = cap {
                            if seq % 64 == 0 && start.elapsed() > cap {
                                shared.stop.store(true, Relaxed);
                                break;
                            }
                        }
                        let is_push = rng.gen_bool(cfg.push_ratio);
                        shared.in_flight[tid].store(start.elapsed().as_nanos() as u64 + 1, Relaxed);
                        if is_push {
                            let v = value(tid, seq);
                            stack.push(tid, v);
                            shared.pushes.fetch_add(1, Relaxed);
                            out.pushed.push(v);
                            out.stats.pushes += 1;
                        } else {
                            match stack.pop(tid) {
                                Some(v) => {
                                    shared.pops.fetch_add(1, Relaxed);
                                    out.popped.push(v);
                                    out.stats.pops += 1;
                                }
                                None => out.stats.empty_pops += 1,
                            }
                        }
                        shared.in_flight[tid].store(0, Relaxed);
                        out.stats.ops += 1;
                        if let Some(sample) = sampler {
                            if out.stats.ops & sample_mask == 0 {
                                let logical = shared
                                    .pushes
                                    .load(Relaxed)
                                    .saturating_sub(shared.pops.load(Relaxed));
                                match sample(logical) {
                                    Ok(st) => {
                                        out.samples += 1;
                                        out.max_ratio = out.max_ratio.max(st.ratio);
                                        out.max_counter = out.max_counter.max(st.max_counter);
                                    }
                                    Err(e) => {
                                        out.chain_error.get_or_insert(e);
                                    }
                                }
                            }
                        }
                    }
                    if cfg.stop_on_first {
                        shared.stop.store(true, Relaxed);
                    }
                    out
                })
            })
            .collect();
        let outcomes: Vec<_> = workers
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect();
        done.store(true, Relaxed);
        outcomes
    });
    let elapsed = start.elapsed();
    (outcomes, elapsed, shared.stalls.into_inner().unwrap())
}

fn base_report(
    cfg: &BenchConfig,
    outcomes: &[ThreadOutcome],
    elapsed: Duration,
    stalls: Vec<Stall>,
) -> BenchReport {
    let per_thread: Vec<ThreadStats> = outcomes.iter().map(|o| o.stats.clone()).collect();
    let total_ops: u64 = per_thread.iter().map(|t| t.ops).sum();
    let counts: Vec<u64> = per_thread.iter().map(|t| t.ops).collect();
    let mut audits = Vec::new();
    let fairness = match compute_fairness(&counts) {
        Ok(f) => Some(f),
        Err(e) => {
            if cfg.ops_per_thread > 0 {
                audits.push(Audit {
                    name: "fairness".into(),
                    passed: false,
                    detail: e.to_string(),
                });
            }
            None
        }
    };
    audits.push(audit::progress(stalls.len(), cfg.op_cap_secs));
    let secs = elapsed.as_secs_f64();
    BenchReport {
        config: cfg.clone(),
        implementation: cfg.implementation.label().to_string(),
        elapsed_secs: secs,
        throughput: if secs > 0.0 {
            total_ops as f64 / secs
        } else {
            0.0
        },
        total_ops,
        per_thread,
        fairness,
        traversal: None,
        structure: None,
        cleanup: None,
        windows: None,
        audits,
        stalls,
        last_window: None,
    }
}

fn audit_values(report: &mut BenchReport, outcomes: &[ThreadOutcome], remaining: &[u64]) {
    let pushed: HashSet<u64> = outcomes
        .iter()
        .flat_map(|o| o.pushed.iter().copied())
        .collect();
    let popped: Vec<u64> = outcomes
        .iter()
        .flat_map(|o| o.popped.iter().copied())
        .collect();
    report.audits.push(audit::uniqueness(&pushed, &popped));
    report
        .audits
        .push(audit::conservation(&pushed, &popped, remaining));
}

fn drain<S: Lifo<u64> + ?Sized>(stack: &S) -> Vec<u64> {
    std::iter::from_fn(|| stack.pop(0)).collect()
}

fn meta(cfg: &BenchConfig) -> HistoryMeta {
    HistoryMeta {
        implementation: cfg.implementation.to_string(),
        w: (cfg.implementation == Implementation::Wf).then_some(cfg.w),
        seed: Some(cfg.seed),
    }
}

fn attach_windows(report: &mut BenchReport, run: &WindowRun, max_ops: usize) {
    let summary = check_windows(run, max_ops);
    let detail = format!(
        "{} windows, {} linearizable, {} violations, {} refused",
        summary.windows, summary.linearizable, summary.violations, summary.refused
    );
    report.audits.push(Audit {
        name: "linearizability".into(),
        passed: summary.violations == 0 && summary.refused == 0,
        detail,
    });
    report.windows = Some(summary);
}

/// Runs the configured workload, then the recorded windows if any, and
/// audits the quiescent result.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchRun, BenchError> {
    cfg.validate()?;
    let mut histories = Vec::new();
    let mut report = match cfg.implementation {
        Implementation::Wf => run_wf(cfg, &mut histories)?,
        Implementation::Treiber => {
            run_baseline(cfg, &TreiberStack::new(), TreiberStack::new, &mut histories)?
        }
        Implementation::Lock => {
            run_baseline(cfg, &LockedStack::new(), LockedStack::new, &mut histories)?
        }
    };
    if !report.passed() {
        report.last_window = histories.last().map(History::to_text);
    }
    Ok(BenchRun { report, histories })
}

fn run_baseline<S, F>(
    cfg: &BenchConfig,
    stack: &S,
    fresh: F,
    histories: &mut Vec<History>,
) -> Result<BenchReport, BenchError>
where
    S: Lifo<u64> + Sync,
    F: FnOnce() -> S,
{
    let (outcomes, elapsed, stalls) = drive(stack, cfg, None);
    let mut report = base_report(cfg, &outcomes, elapsed, stalls);
    let remaining = drain(stack);
    audit_values(&mut report, &outcomes, &remaining);
    if let Some(win) = cfg.record_history {
        let run = run_windows(
            &fresh(),
            cfg.threads,
            cfg.push_ratio,
            cfg.seed,
            win,
            meta(cfg),
        )?;
        attach_windows(&mut report, &run, win.max_ops);
        *histories = run.histories;
    }
    Ok(report)
}

fn run_wf(cfg: &BenchConfig, histories: &mut Vec<History>) -> Result<BenchReport, BenchError> {
    let config = StackConfig::new(cfg.threads, cfg.w).cleanup_mode(cfg.cleanup_mode);
    let instr = Arc::new(Instrumentation::new(cfg.w));
    let stack = WaitFreeStack::with_observer(config, instr.clone())?;
    let sampler = |logical: u64| structure_stats(&stack, logical).map_err(|e| e.to_string());
    let (outcomes, elapsed, stalls) = drive(&stack, cfg, Some(&sampler));
    let mut report = base_report(cfg, &outcomes, elapsed, stalls);

    // Quiescent: every clean ran to completion inside the operation that
    // started it, so no delete is left pending.
    let snap = instr.snapshot();
    let pushes: u64 = outcomes.iter().map(|o| o.stats.pushes).sum();
    let pops: u64 = outcomes.iter().map(|o| o.stats.pops).sum();
    let logical = pushes - pops.min(pushes);
    let quiescent = structure_stats(&stack, logical);
    report.audits.push(audit::acyclic(
        quiescent
            .as_ref()
            .map(|s| s.physical_len)
            .map_err(|e| e.to_string()),
    ));
    if let Some(e) = outcomes.iter().find_map(|o| o.chain_error.clone()) {
        report
            .audits
            .push(audit::acyclic(Err(format!("during sampling: {e}"))));
    }
    let sampled_counter = outcomes.iter().map(|o| o.max_counter).max().unwrap_or(0);
    let quiescent_counter = quiescent.as_ref().map_or(0, |s| s.max_counter);
    report.audits.push(audit::counter_limit(
        snap.vote_max.max(sampled_counter).max(quiescent_counter),
        cfg.w,
    ));
    report
        .audits
        .push(audit::single_clean(&snap.full_bases, &snap.cleans));
    report
        .audits
        .push(audit::disjoint_unlinks(&snap.unlinks, &snap.cleans, cfg.w));
    if let Ok(q) = &quiescent {
        report.audits.push(audit::structure_bound(
            q.physical_len,
            logical,
            cfg.w,
            cfg.threads,
        ));
    }

    let chain_values = stack.unmarked_values().unwrap_or_default();
    let remaining = drain(&stack);
    report
        .audits
        .push(audit::drain_matches_chain(&chain_values, &remaining));
    audit_values(&mut report, &outcomes, &remaining);

    report.traversal = Some(TraversalStats {
        pops: snap.traversals,
        max: snap.traversal_max as u64,
        mean: snap.traversal_mean,
        bound: cfg.w * cfg.threads as u64,
    });
    report.structure = quiescent.ok().map(|q| StructureReport {
        samples: outcomes.iter().map(|o| o.samples).sum(),
        max_sampled_ratio: outcomes.iter().map(|o| o.max_ratio).fold(0.0, f64::max),
        bound: structural_bound(logical, cfg.w, cfg.threads),
        quiescent: q,
    });
    report.cleanup = Some(CleanupReport {
        clean_invocations: snap.cleans.len() as u64,
        unlinks: snap.unlinks.len() as u64,
        full_bases: snap.full_bases.len() as u64,
        max_vote: snap.vote_max as u64,
    });

    if let Some(win) = cfg.record_history {
        let chaos = if win.chaos { WINDOW_CHAOS } else { 0 };
        let wstack =
            WaitFreeStack::with_observer(config, Instrumentation::with_chaos(cfg.w, chaos))?;
        let run = run_windows(
            &wstack,
            cfg.threads,
            cfg.push_ratio,
            cfg.seed,
            win,
            meta(cfg),
        )?;
        attach_windows(&mut report, &run, win.max_ops);
        *histories = run.histories;
    }
    Ok(report)
}

/// Runs the same workload on every implementation.
pub fn compare_implementations(cfg: &BenchConfig) -> Result<Vec<BenchReport>, BenchError> {
    Implementation::ALL
        .iter()
        .map(|&implementation| {
            let cfg = BenchConfig {
                implementation,
                ..cfg.clone()
            };
            run_benchmark(&cfg).map(|r| r.report)
        })
        .collect()
}
