use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering::Relaxed};
use std::sync::Mutex;

use rand::Rng;

use crate::observer::{Observer, Step};

/// Counting observer used by the harness.
///
/// Vote, clean and unlink events are kept in full so the quiescent audits can
/// cross-check them. All of them happen at most once per W operations.
#[derive(Debug, Default)]
pub struct Instrumentation {
    w: u64,
    /// Yield probability at each [`Step`], out of 256.
    chaos: u8,
    tops: AtomicU64,
    marks: AtomicU64,
    traversals: AtomicU64,
    traversal_sum: AtomicU64,
    traversal_max: AtomicUsize,
    vote_max: AtomicUsize,
    full_bases: Mutex<Vec<u64>>,
    cleans: Mutex<Vec<u64>>,
    unlinks: Mutex<Vec<(u64, u64)>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstrumentationSnapshot {
    pub top_advances: u64,
    pub marks: u64,
    pub traversals: u64,
    pub traversal_max: usize,
    pub traversal_mean: f64,
    pub vote_max: usize,
    /// Bases whose counter reached exactly W + 1.
    pub full_bases: Vec<u64>,
    pub cleans: Vec<u64>,
    /// `(base_index, right_index)` per successful unlink.
    pub unlinks: Vec<(u64, u64)>,
}

impl Instrumentation {
    pub fn new(w: u64) -> Self {
        Instrumentation {
            w,
            ..Default::default()
        }
    }

    /// Yields at internal steps with probability `chaos / 256`.
    pub fn with_chaos(w: u64, chaos: u8) -> Self {
        Instrumentation {
            w,
            chaos,
            ..Default::default()
        }
    }

    pub fn snapshot(&self) -> InstrumentationSnapshot {
        let traversals = self.traversals.load(Relaxed);
        let mut full_bases = self.full_bases.lock().unwrap().clone();
        let mut cleans = self.cleans.lock().unwrap().clone();
        let mut unlinks = self.unlinks.lock().unwrap().clone();
        full_bases.sort_unstable();
        cleans.sort_unstable();
        unlinks.sort_unstable();
        InstrumentationSnapshot {
            top_advances: self.tops.load(Relaxed),
            marks: self.marks.load(Relaxed),
            traversals,
            traversal_max: self.traversal_max.load(Relaxed),
            traversal_mean: if traversals == 0 {
                0.0
            } else {
                self.traversal_sum.load(Relaxed) as f64 / traversals as f64
            },
            vote_max: self.vote_max.load(Relaxed),
            full_bases,
            cleans,
            unlinks,
        }
    }
}

impl Observer for Instrumentation {
    fn top_advanced(&self, _index: u64) {
        self.tops.fetch_add(1, Relaxed);
    }

    fn node_marked(&self, _index: u64) {
        self.marks.fetch_add(1, Relaxed);
    }

    fn pop_traversal(&self, visited: usize) {
        self.traversals.fetch_add(1, Relaxed);
        self.traversal_sum.fetch_add(visited as u64, Relaxed);
        self.traversal_max.fetch_max(visited, Relaxed);
    }

    fn vote(&self, base_index: u64, count: usize) {
        self.vote_max.fetch_max(count, Relaxed);
        if count as u64 == self.w + 1 {
            self.full_bases.lock().unwrap().push(base_index);
        }
    }

    fn clean_invoked(&self, base_index: u64) {
        self.cleans.lock().unwrap().push(base_index);
    }

    fn unlinked(&self, base_index: u64, right_index: u64) {
        self.unlinks.lock().unwrap().push((base_index, right_index));
    }

    fn step(&self, _tid: usize, _step: Step) {
        if self.chaos > 0 && rand::thread_rng().gen::<u8>() < self.chaos {
            std::thread::yield_now();
        }
    }
}
