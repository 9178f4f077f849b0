//! Short recorded windows on a live stack.
//!
//! The registered threads stay alive for the whole sweep and meet at a
//! barrier before and after every window. Inside a window each thread runs a
//! few seeded operations; after the second barrier thread 0 pops until the
//! stack reports Empty. The drain is recorded too, so every window starts
//! from an empty logical stack and can be checked on its own.

use std::sync::atomic::{AtomicUsize, Ordering::Relaxed};
use std::sync::{Barrier, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::WindowConfig;
use crate::baselines::Lifo;
use crate::lincheck::{Checker, History, HistoryMeta, RecordError, Recorder, ThreadLog, Verdict};

const WINDOW_STREAM: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Debug)]
pub struct WindowRun {
    pub histories: Vec<History>,
    /// Windows whose drain did not reach Empty within the op budget.
    pub overflows: usize,
}

pub(crate) fn value(tid: usize, seq: u64) -> u64 {
    ((tid as u64) << 40) | seq
}

pub fn run_windows<S>(
    stack: &S,
    threads: usize,
    push_ratio: f64,
    seed: u64,
    cfg: WindowConfig,
    meta: HistoryMeta,
) -> Result<WindowRun, RecordError>
where
    S: Lifo<u64> + Sync + ?Sized,
{
    let concurrent = cfg.concurrent_ops();
    let drain_max = concurrent + 1;
    // Enough for thread 0, which may run its share and the whole drain.
    let recorder = Recorder::new(2 * (concurrent + drain_max) + 2);
    let barrier = Barrier::new(threads);
    let logs: Vec<Mutex<Vec<ThreadLog<'_>>>> =
        (0..cfg.windows).map(|_| Mutex::new(Vec::new())).collect();
    let overflows = AtomicUsize::new(0);

    std::thread::scope(|s| {
        let workers: Vec<_> = (0..threads)
            .map(|tid| {
                let (recorder, barrier, logs, overflows) = (&recorder, &barrier, &logs, &overflows);
                s.spawn(move || -> Result<(), RecordError> {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        seed ^ WINDOW_STREAM.wrapping_mul(tid as u64 + 1),
                    );
                    let share = concurrent / threads + usize::from(tid < concurrent % threads);
                    let mut seq = 0u64;
                    let mut failure = None;
                    for slot in logs.iter() {
                        let mut log = recorder.thread_log(tid);
                        barrier.wait();
                        for _ in 0..share {
                            if failure.is_some() {
                                break;
                            }
                            if cfg.chaos && rng.gen_bool(0.25) {
                                std::thread::yield_now();
                            }
                            let r = if rng.gen_bool(push_ratio) {
                                seq += 1;
                                log.push(stack, value(tid, seq))
                            } else {
                                log.pop(stack).map(drop)
                            };
                            if let Err(e) = r {
                                failure = Some(e);
                            }
                        }
                        barrier.wait();
                        if tid == 0 && failure.is_none() {
                            let mut empty = false;
                            for _ in 0..drain_max {
                                match log.pop(stack) {
                                    Ok(None) => {
                                        empty = true;
                                        break;
                                    }
                                    Ok(Some(_)) => {}
                                    Err(e) => {
                                        failure = Some(e);
                                        break;
                                    }
                                }
                            }
                            if !empty {
                                overflows.fetch_add(1, Relaxed);
                                while stack.pop(tid).is_some() {}
                            }
                        }
                        slot.lock().unwrap().push(log);
                    }
                    failure.map_or(Ok(()), Err)
                })
            })
            .collect();
        workers
            .into_iter()
            .try_for_each(|h| h.join().expect("window worker panicked"))
    })?;

    let histories = logs
        .into_iter()
        .map(|slot| recorder.merge(slot.into_inner().unwrap(), meta.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WindowRun {
        histories,
        overflows: overflows.into_inner(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub window: usize,
    /// The minimal violating prefix in history text format.
    pub history: String,
    /// Parsing the text back and checking it gives the same verdict.
    pub recheck_agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub windows: usize,
    pub linearizable: usize,
    pub violations: usize,
    pub refused: usize,
    pub overflows: usize,
    pub max_ops: usize,
    /// The first few violations.
    pub witnesses: Vec<Witness>,
}

pub const MAX_WITNESSES: usize = 8;

pub fn check_windows(run: &WindowRun, max_ops: usize) -> WindowSummary {
    let checker = Checker::new();
    let mut summary = WindowSummary {
        windows: run.histories.len(),
        linearizable: 0,
        violations: 0,
        refused: 0,
        overflows: run.overflows,
        max_ops,
        witnesses: Vec::new(),
    };
    for (i, h) in run.histories.iter().enumerate() {
        match checker.check(h) {
            Ok(Verdict::Linearizable { .. }) => summary.linearizable += 1,
            Ok(Verdict::Violation { prefix }) => {
                summary.violations += 1;
                if summary.witnesses.len() < MAX_WITNESSES {
                    let text = prefix.to_text();
                    let recheck_agrees = History::parse(&text)
                        .ok()
                        .and_then(|p| checker.check(&p).ok())
                        .is_some_and(|v| {
                            v == Verdict::Violation {
                                prefix: prefix.clone(),
                            }
                        });
                    summary.witnesses.push(Witness {
                        window: i,
                        history: text,
                        recheck_agrees,
                    });
                }
            }
            Err(_) => summary.refused += 1,
        }
    }
    summary
}
