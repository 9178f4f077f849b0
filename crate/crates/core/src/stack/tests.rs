use std::sync::atomic::Ordering::SeqCst;
use std::sync::{Arc, Mutex};

use crossbeam_epoch as epoch;

use super::*;
use crate::cleanup::VoteSource;

#[derive(Default)]
struct Events {
    votes: Mutex<Vec<(u64, usize)>>,
    cleans: Mutex<Vec<u64>>,
    unlinks: Mutex<Vec<(u64, u64)>>,
    tops: Mutex<Vec<u64>>,
}

impl Observer for Events {
    fn vote(&self, base: u64, count: usize) {
        self.votes.lock().unwrap().push((base, count));
    }
    fn clean_invoked(&self, base: u64) {
        self.cleans.lock().unwrap().push(base);
    }
    fn unlinked(&self, base: u64, right: u64) {
        self.unlinks.lock().unwrap().push((base, right));
    }
    fn top_advanced(&self, index: u64) {
        self.tops.lock().unwrap().push(index);
    }
}

fn observed(w: u64, mode: CleanupMode) -> (WaitFreeStack<u64, Arc<Events>>, Arc<Events>) {
    let events = Arc::new(Events::default());
    let stack =
        WaitFreeStack::with_observer(StackConfig::new(1, w).cleanup_mode(mode), events.clone())
            .unwrap();
    (stack, events)
}

fn indices<O: Observer>(stack: &WaitFreeStack<u64, O>) -> Vec<u64> {
    stack.chain().unwrap().iter().map(|n| n.index).collect()
}

/// Runs `f` on the chain node with `index`.
fn with_node<O: Observer>(
    stack: &WaitFreeStack<u64, O>,
    index: u64,
    f: impl FnOnce(Shared<'_, Node<u64>>, &Guard),
) {
    let guard = &epoch::pin();
    let mut curr = stack.top.load(SeqCst, guard);
    while unsafe { curr.deref() }.index.load(SeqCst) != index {
        assert!(!stack.is_sentinel(curr), "node {index} not on the chain");
        curr = unsafe { curr.deref() }.prev.load(SeqCst, guard);
    }
    f(curr, guard);
}

#[test]
fn rejects_bad_config() {
    assert_eq!(
        WaitFreeStack::<u64>::new(0, 8).err(),
        Some(ConfigError::NoThreads(0))
    );
    assert_eq!(
        WaitFreeStack::<u64>::new(4, 1).err(),
        Some(ConfigError::RangeTooNarrow(1))
    );
}

#[test]
fn fresh_stack_is_empty() {
    let s = WaitFreeStack::<u64>::new(1, 8).unwrap();
    assert_eq!(s.pop(0), None);
    assert_eq!(s.top_index(), 0);
    assert_eq!(s.physical_len(), Ok(0));
}

#[test]
fn announce_slots_start_as_completed_dummies() {
    let s = WaitFreeStack::<u64>::new(64, 8).unwrap();
    assert_eq!(s.threads(), 64);
    let guard = &epoch::pin();
    for slot in s.announce.iter() {
        let op = unsafe { slot.load(SeqCst, guard).deref() };
        assert_eq!(op.phase, -1);
        assert!(op.pushed.load(SeqCst));
        assert!(op.node.is_null());
    }
}

#[test]
fn sentinel_links_to_itself() {
    let s = WaitFreeStack::<u64>::new(1, 8).unwrap();
    let guard = &epoch::pin();
    let sentinel = unsafe { &*s.sentinel };
    assert_eq!(sentinel.prev.load(SeqCst, guard).as_raw(), s.sentinel);
    assert_eq!(sentinel.index.load(SeqCst), 0);
}

#[test]
fn minimal_w_is_lifo() {
    let s = WaitFreeStack::new(4, 2).unwrap();
    for v in 1..=4u64 {
        s.push(0, v);
    }
    let got: Vec<_> = (0..5).map(|_| s.pop(0)).collect();
    assert_eq!(got, vec![Some(4), Some(3), Some(2), Some(1), None]);
}

#[test]
fn first_push_gets_index_one() {
    let s = WaitFreeStack::new(1, 8).unwrap();
    s.push(0, 42u64);
    assert_eq!(s.top_index(), 1);
    assert_eq!(s.unmarked_values(), Ok(vec![42]));
}

#[test]
fn sequential_pushes_chain_by_index() {
    let s = WaitFreeStack::new(1, 8).unwrap();
    for v in 1..=3u64 {
        s.push(0, v);
    }
    assert_eq!(indices(&s), vec![3, 2, 1]);
    assert_eq!(s.pop(0), Some(3));
    assert_eq!(s.pop(0), Some(2));
    assert_eq!(s.pop(0), Some(1));
}

#[test]
fn pushed_flag_is_set_on_return() {
    let s = WaitFreeStack::new(2, 8).unwrap();
    s.push(1, 7u64);
    let guard = &epoch::pin();
    let op = unsafe { s.announce[1].load(SeqCst, guard).deref() };
    assert_eq!(op.phase, 0);
    assert!(op.pushed.load(SeqCst));
}

#[test]
fn push_on_multiple_of_w_votes_once() {
    let (s, ev) = observed(2, CleanupMode::Corrected);
    for v in 1..=4u64 {
        s.push(0, v);
    }
    assert_eq!(*ev.tops.lock().unwrap(), vec![1, 2, 3, 4]);
    // Push of 2 walks from 1 to the sentinel; push of 4 votes on base 2.
    assert_eq!(*ev.votes.lock().unwrap(), vec![(2, 1)]);
}

#[test]
fn vote_above_range_goes_to_its_base() {
    let w = 4;
    for mode in [CleanupMode::PaperFaithful, CleanupMode::Corrected] {
        let (s, ev) = observed(w, mode);
        for v in 1..=w + 1 {
            s.push(0, v);
        }
        ev.votes.lock().unwrap().clear();
        with_node(&s, w + 1, |n, g| s.try_clean_up(0, n, VoteSource::Pop, g));
        assert_eq!(*ev.votes.lock().unwrap(), vec![(w, 1)], "{mode}");
    }
}

#[test]
fn residue_nodes_never_vote() {
    let w = 4;
    for mode in [CleanupMode::PaperFaithful, CleanupMode::Corrected] {
        let (s, ev) = observed(w, mode);
        for v in 1..w {
            s.push(0, v);
        }
        for i in 1..w {
            with_node(&s, i, |n, g| s.try_clean_up(0, n, VoteSource::Pop, g));
        }
        assert!(ev.votes.lock().unwrap().is_empty(), "{mode}");
    }
}

#[test]
fn base_pop_vote_depends_on_mode() {
    let w = 4;
    let (s, ev) = observed(w, CleanupMode::PaperFaithful);
    for v in 1..=w {
        s.push(0, v);
    }
    with_node(&s, w, |n, g| s.try_clean_up(0, n, VoteSource::Pop, g));
    assert!(ev.votes.lock().unwrap().is_empty());

    let (s, ev) = observed(w, CleanupMode::Corrected);
    for v in 1..=w {
        s.push(0, v);
    }
    with_node(&s, w, |n, g| s.try_clean_up(0, n, VoteSource::Pop, g));
    assert_eq!(*ev.votes.lock().unwrap(), vec![(w, 1)]);
}

#[test]
fn direct_clean_skips_one_range() {
    let w = 4;
    let (s, ev) = observed(w, CleanupMode::Corrected);
    for v in 1..=2 * w + 1 {
        s.push(0, v);
    }
    with_node(&s, w, |base, g| {
        s.clean(0, base, g);
        assert_eq!(indices(&s), vec![9, 8, 3, 2, 1]);
        // Cleaning the same base again finds the range gone.
        s.clean(0, base, g);
    });
    assert_eq!(indices(&s), vec![9, 8, 3, 2, 1]);
    assert_eq!(*ev.unlinks.lock().unwrap(), vec![(w, 2 * w)]);
    assert_eq!(*ev.cleans.lock().unwrap(), vec![w, w]);
}

#[test]
fn help_finish_delete_without_request_is_noop() {
    let s = WaitFreeStack::new(1, 2).unwrap();
    for v in 1..=5u64 {
        s.push(0, v);
    }
    let guard = &epoch::pin();
    s.help_finish_delete(0, guard);
    assert_eq!(indices(&s), vec![5, 4, 3, 2, 1]);
}

#[test]
fn claimed_ranges_are_unlinked() {
    let w = 4;
    let (s, ev) = observed(w, CleanupMode::Corrected);
    for v in 1..=3 * w {
        s.push(0, v);
    }
    for v in (w + 1..=3 * w).rev() {
        assert_eq!(s.pop(0), Some(v));
    }
    assert_eq!(*ev.cleans.lock().unwrap(), vec![2 * w]);
    let physical = s.physical_len().unwrap() as u64;
    let logical = w;
    assert_eq!(indices(&s), vec![12, 7, 6, 5, 4, 3, 2, 1]);
    assert!(physical <= logical + w + (w - 1));
    for n in s.chain().unwrap() {
        assert!(n.counter as u64 <= w + 1);
    }
}

#[test]
fn drained_stack_collapses_to_residue() {
    let w = 4;
    let (s, ev) = observed(w, CleanupMode::Corrected);
    let n = 10 * w;
    for v in 1..=n {
        s.push(0, v);
    }
    for v in (1..=n).rev() {
        assert_eq!(s.pop(0), Some(v));
    }
    assert_eq!(s.pop(0), None);
    // Every range with a pushed right node is gone. Node 40 and the residue
    // below the first base stay.
    let cleaned: Vec<u64> = (1..10).map(|k| k * w).collect();
    let mut cleans = ev.cleans.lock().unwrap().clone();
    cleans.sort();
    assert_eq!(cleans, cleaned);
    assert_eq!(indices(&s), vec![40, 3, 2, 1]);
}

/// With the vote walk starting at the predecessor, the base of a range can
/// be unlinked while still unclaimed.
#[test]
fn paper_faithful_votes_can_lose_a_base() {
    let s =
        WaitFreeStack::with_config(StackConfig::new(1, 2).cleanup_mode(CleanupMode::PaperFaithful))
            .unwrap();
    for v in 1..=4u64 {
        s.push(0, v);
    }
    let got: Vec<_> = (0..4).map(|_| s.pop(0)).collect();
    assert_eq!(got, vec![Some(4), Some(3), Some(1), None]);
}

#[test]
fn cleanup_mode_parses() {
    assert_eq!("paper".parse(), Ok(CleanupMode::PaperFaithful));
    assert_eq!("paper-faithful".parse(), Ok(CleanupMode::PaperFaithful));
    assert_eq!("corrected".parse(), Ok(CleanupMode::Corrected));
    assert!("other".parse::<CleanupMode>().is_err());
    assert_eq!(CleanupMode::PaperFaithful.to_string(), "paper");
}

#[test]
#[should_panic(expected = "not registered")]
fn foreign_tid_panics() {
    let s = WaitFreeStack::new(2, 8).unwrap();
    s.push(2, 1u64);
}

#[test]
fn drop_releases_values() {
    let tracker = Arc::new(());
    {
        let s = WaitFreeStack::new(1, 2).unwrap();
        for _ in 0..5 {
            s.push(0, tracker.clone());
        }
        drop(s.pop(0));
    }
    // Only nodes still on the chain hold values; no range was unlinked.
    assert_eq!(Arc::strong_count(&tracker), 1);
}
