#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use wfstack::{Observer, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Armed,
    Parked,
    Open,
}

/// Parks a thread the first time it reaches an armed `(tid, step)` until the
/// test opens the gate. Also records cleanup events.
#[derive(Default)]
pub struct Scheduler {
    gates: Mutex<HashMap<(usize, Step), Gate>>,
    cv: Condvar,
    pub tops: Mutex<Vec<u64>>,
    pub cleans: Mutex<Vec<u64>>,
    pub unlinks: Mutex<Vec<(u64, u64)>>,
}

const TIMEOUT: Duration = Duration::from_secs(10);

impl Scheduler {
    pub fn arm(&self, tid: usize, step: Step) {
        self.gates.lock().unwrap().insert((tid, step), Gate::Armed);
    }

    /// Blocks until `tid` is parked at `step`.
    pub fn wait_parked(&self, tid: usize, step: Step) {
        let gates = self.gates.lock().unwrap();
        let (_g, res) = self
            .cv
            .wait_timeout_while(gates, TIMEOUT, |g| {
                g.get(&(tid, step)) != Some(&Gate::Parked)
            })
            .unwrap();
        assert!(!res.timed_out(), "thread {tid} never reached {step:?}");
    }

    pub fn open(&self, tid: usize, step: Step) {
        self.gates.lock().unwrap().insert((tid, step), Gate::Open);
        self.cv.notify_all();
    }
}

impl Observer for Scheduler {
    fn step(&self, tid: usize, step: Step) {
        let mut gates = self.gates.lock().unwrap();
        if gates.get(&(tid, step)) != Some(&Gate::Armed) {
            return;
        }
        gates.insert((tid, step), Gate::Parked);
        self.cv.notify_all();
        let (_g, res) = self
            .cv
            .wait_timeout_while(gates, TIMEOUT, |g| g.get(&(tid, step)) != Some(&Gate::Open))
            .unwrap();
        assert!(
            !res.timed_out(),
            "thread {tid} parked at {step:?} was never released"
        );
    }

    fn top_advanced(&self, index: u64) {
        self.tops.lock().unwrap().push(index);
    }

    fn clean_invoked(&self, base: u64) {
        self.cleans.lock().unwrap().push(base);
    }

    fn unlinked(&self, base: u64, right: u64) {
        self.unlinks.lock().unwrap().push((base, right));
    }
}
