//! Hand-scheduled interleavings. A [`Scheduler`] parks chosen threads at
//! named steps so the test can run other threads through the gap.

mod common;

use std::sync::Arc;
use std::thread;

use common::Scheduler;
use wfstack::lincheck::{check_linearizable, HistoryMeta, Recorder};
use wfstack::{CleanupMode, StackConfig, Step, WaitFreeStack};

fn stack(threads: usize, w: u64) -> (Arc<WaitFreeStack<u64, Arc<Scheduler>>>, Arc<Scheduler>) {
    let sched = Arc::new(Scheduler::default());
    let config = StackConfig::new(threads, w).cleanup_mode(CleanupMode::Corrected);
    let s = WaitFreeStack::with_observer(config, sched.clone()).unwrap();
    (Arc::new(s), sched)
}

#[test]
fn helper_finishes_a_parked_attach() {
    let (s, sched) = stack(2, 8);
    sched.arm(0, Step::AttachLinked);
    let a = {
        let s = s.clone();
        thread::spawn(move || s.push(0, 10))
    };
    sched.wait_parked(0, Step::AttachLinked);

    // A's node hangs off the sentinel but top has not moved. B helps it first.
    s.push(1, 20);
    assert_eq!(s.top_index(), 2);
    assert_eq!(s.unmarked_values(), Ok(vec![20, 10]));
    assert_eq!(s.pop(1), Some(20));
    assert_eq!(s.pop(1), Some(10));

    sched.open(0, Step::AttachLinked);
    a.join().unwrap();
    assert_eq!(s.pop(1), None);
    assert_eq!(*sched.tops.lock().unwrap(), vec![1, 2]);
}

#[test]
fn two_helpers_race_on_the_top_swing() {
    let (s, sched) = stack(3, 8);
    sched.arm(0, Step::AttachLinked);
    sched.arm(1, Step::TopSwingPending);
    sched.arm(2, Step::TopSwingPending);
    let a = {
        let s = s.clone();
        thread::spawn(move || s.push(0, 10))
    };
    sched.wait_parked(0, Step::AttachLinked);
    let helpers: Vec<_> = [(1, 20), (2, 30)]
        .into_iter()
        .map(|(tid, v)| {
            let s = s.clone();
            thread::spawn(move || s.push(tid, v))
        })
        .collect();
    // Both helpers have raised A's pushed flag and are about to swing top.
    sched.wait_parked(1, Step::TopSwingPending);
    sched.wait_parked(2, Step::TopSwingPending);
    assert_eq!(s.top_index(), 0);
    sched.open(1, Step::TopSwingPending);
    sched.open(2, Step::TopSwingPending);
    for h in helpers {
        h.join().unwrap();
    }
    sched.open(0, Step::AttachLinked);
    a.join().unwrap();

    let tops = sched.tops.lock().unwrap().clone();
    assert_eq!(tops.iter().filter(|&&i| i == 1).count(), 1, "{tops:?}");
    let mut sorted = tops.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![1, 2, 3]);
    let chain: Vec<u64> = s.chain().unwrap().iter().map(|n| n.index).collect();
    assert_eq!(chain, vec![3, 2, 1]);
    let mut values = s.unmarked_values().unwrap();
    assert_eq!(values.pop(), Some(10));
    values.sort_unstable();
    assert_eq!(values, vec![20, 30]);
}

#[test]
fn stale_attacher_retries_after_helper_wins() {
    let (s, sched) = stack(2, 8);
    sched.arm(0, Step::AttachReadTop);
    let a = {
        let s = s.clone();
        thread::spawn(move || s.push(0, 10))
    };
    // A has read top = sentinel and its empty next_done.
    sched.wait_parked(0, Step::AttachReadTop);
    s.push(1, 20);
    sched.open(0, Step::AttachReadTop);
    a.join().unwrap();
    assert_eq!(s.unmarked_values(), Ok(vec![20, 10]));
    assert_eq!(s.physical_len(), Ok(2));
}

#[test]
fn concurrent_pops_split_two_values() {
    let (s, sched) = stack(2, 8);
    let st = &*s;
    let recorder = Recorder::new(8);
    let mut log_a = recorder.thread_log(0);
    let mut log_b = recorder.thread_log(1);
    log_a.push(st, 1).unwrap();
    log_a.push(st, 2).unwrap();
    sched.arm(0, Step::PopMarked);
    let log_a = thread::scope(|scope| {
        let h = scope.spawn(move || {
            assert_eq!(log_a.pop(st).unwrap(), Some(2));
            log_a
        });
        // A has claimed the top node and not yet returned.
        sched.wait_parked(0, Step::PopMarked);
        assert_eq!(log_b.pop(st).unwrap(), Some(1));
        sched.open(0, Step::PopMarked);
        h.join().unwrap()
    });
    let h = recorder
        .merge([log_a, log_b], HistoryMeta::default())
        .unwrap();
    assert_eq!(h.events.len(), 8);
    assert!(
        check_linearizable(&h).unwrap().is_linearizable(),
        "{}",
        h.to_text()
    );
    assert_eq!(s.pop(1), None);
}

#[test]
fn two_cleaners_serialize_on_adoption() {
    let (s, sched) = stack(2, 2);
    for v in 1..=6 {
        s.push(0, v);
    }
    assert_eq!(s.pop(0), Some(6));
    assert_eq!(s.pop(0), Some(5));
    // The next pop fills base 4 and parks right before unlinking [4, 5].
    sched.arm(0, Step::UnlinkPending);
    let a = {
        let s = s.clone();
        thread::spawn(move || s.pop(0))
    };
    sched.wait_parked(0, Step::UnlinkPending);

    // B claims 3 and 2, fills base 2, and must first finish A's request.
    assert_eq!(s.pop(1), Some(3));
    assert_eq!(s.pop(1), Some(2));
    let chain: Vec<u64> = s.chain().unwrap().iter().map(|n| n.index).collect();
    assert_eq!(chain, vec![6, 1]);

    sched.open(0, Step::UnlinkPending);
    assert_eq!(a.join().unwrap(), Some(4));
    assert_eq!(*sched.unlinks.lock().unwrap(), vec![(4, 6), (2, 6)]);
    let mut cleans = sched.cleans.lock().unwrap().clone();
    cleans.sort_unstable();
    assert_eq!(cleans, vec![2, 4]);
    assert_eq!(s.pop(1), Some(1));
    assert_eq!(s.pop(1), None);
}
