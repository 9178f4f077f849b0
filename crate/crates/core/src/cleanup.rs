//! Lazy physical deletion.
//!
//! A range is the run of W nodes `[base, base + W - 1]` where `base.index` is a
//! multiple of W. Every claimed node and every push of a range's right node
//! casts one vote on a base counter; the thread whose vote lifts the counter to
//! exactly W + 1 announces a [`DeleteRequest`]. Delete requests are ordered by
//! phase, adopted one at a time through `unique_request`, and finished by any
//! helper, which redirects `right_node.prev` from `left_node` past the range.

use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU8, Ordering::SeqCst};

use crossbeam_epoch::{Atomic, Guard, Owned, Shared};
use crossbeam_utils::Backoff;

use crate::observer::{Observer, Step};
use crate::stack::{CleanupMode, Node, WaitFreeStack};

/// Set once a request has left its owner's `all_delete_requests` slot.
const LEFT_SLOT: u8 = 0b01;
/// Set once a request has been displaced from `unique_request`.
const LEFT_UNIQUE: u8 = 0b10;

pub(crate) struct DeleteRequest<T> {
    pub(crate) phase: i64,
    #[allow(dead_code)]
    pub(crate) thread_id: usize,
    pub(crate) pending: AtomicBool,
    pub(crate) node: *const Node<T>,
    /// Each request is referenced by its owner's slot and, once adopted, by
    /// `unique_request`. Whoever clears the second reference retires it.
    released: AtomicU8,
}

impl<T> DeleteRequest<T> {
    fn dummy() -> Self {
        DeleteRequest {
            phase: -1,
            thread_id: usize::MAX,
            pending: AtomicBool::new(false),
            node: std::ptr::null(),
            released: AtomicU8::new(LEFT_SLOT),
        }
    }
}

pub(crate) struct CleanupState<T> {
    delete_phase: AtomicI64,
    all_delete_requests: Box<[Atomic<DeleteRequest<T>>]>,
    unique_request: Atomic<DeleteRequest<T>>,
}

impl<T> CleanupState<T> {
    pub(crate) fn new(threads: usize) -> Self {
        CleanupState {
            delete_phase: AtomicI64::new(0),
            all_delete_requests: (0..threads).map(|_| Atomic::null()).collect(),
            unique_request: Atomic::new(DeleteRequest::dummy()),
        }
    }

    /// # Safety
    /// No other thread may access the state.
    pub(crate) unsafe fn free_all(&mut self, guard: &Guard) {
        let unique = self.unique_request.load(SeqCst, guard);
        for slot in self.all_delete_requests.iter() {
            let request = slot.load(SeqCst, guard);
            if !request.is_null() && request != unique {
                drop(request.into_owned());
            }
        }
        drop(unique.into_owned());
    }

    fn release<'g>(&self, request: Shared<'g, DeleteRequest<T>>, flag: u8, guard: &'g Guard) {
        // SAFETY: the caller just removed one of the two references; the
        // request is still protected by `guard`.
        let r = unsafe { request.deref() };
        if (r.released.fetch_or(flag, SeqCst) | flag) == (LEFT_SLOT | LEFT_UNIQUE) {
            unsafe { guard.defer_destroy(request) };
        }
    }
}

/// Why a cleanup vote is being cast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VoteSource {
    Pop,
    Push,
}

impl<T, O> WaitFreeStack<T, O>
where
    T: Clone + Send + Sync + 'static,
    O: Observer,
{
    /// Casts a vote for the base of the range below `my_node`.
    pub(crate) fn try_clean_up(
        &self,
        tid: usize,
        my_node: Shared<'_, Node<T>>,
        source: VoteSource,
        guard: &Guard,
    ) {
        let mut temp = match (self.mode, source) {
            (CleanupMode::Corrected, VoteSource::Pop) => my_node,
            // SAFETY: `my_node` is protected by `guard`.
            _ => unsafe { my_node.deref() }.prev.load(SeqCst, guard),
        };
        while !self.is_sentinel(temp) {
            // SAFETY: every node on a predecessor walk is protected by `guard`.
            let t = unsafe { temp.deref() };
            let index = t.index.load(SeqCst);
            if index % self.w == 0 {
                let count = t.counter.fetch_add(1, SeqCst) + 1;
                self.observer.vote(index, count);
                if count as u64 == self.w + 1 {
                    self.clean(tid, temp, guard);
                }
                break;
            }
            temp = t.prev.load(SeqCst, guard);
        }
    }

    /// Announces a delete request for the range starting at `base` and drives
    /// it to completion.
    pub(crate) fn clean(&self, tid: usize, base: Shared<'_, Node<T>>, guard: &Guard) {
        // SAFETY: protected by `guard`.
        self.observer
            .clean_invoked(unsafe { base.deref() }.index.load(SeqCst));
        let state = &self.cleanup;
        let phase = state.delete_phase.fetch_add(1, SeqCst);
        let request = Owned::new(DeleteRequest {
            phase,
            thread_id: tid,
            pending: AtomicBool::new(true),
            node: base.as_raw(),
            released: AtomicU8::new(0),
        })
        .into_shared(guard);
        let old = state.all_delete_requests[tid].swap(request, SeqCst, guard);
        if !old.is_null() {
            state.release(old, LEFT_SLOT, guard);
        }
        self.help_delete(tid, request, guard);
    }

    fn help_delete(&self, tid: usize, request: Shared<'_, DeleteRequest<T>>, guard: &Guard) {
        let mut min: Option<Shared<'_, DeleteRequest<T>>> = None;
        for slot in self.cleanup.all_delete_requests.iter() {
            let candidate = slot.load(SeqCst, guard);
            if candidate.is_null() {
                continue;
            }
            // SAFETY: slot contents are protected by `guard`.
            let c = unsafe { candidate.deref() };
            if !c.pending.load(SeqCst) {
                continue;
            }
            if min.is_none_or(|m| c.phase < unsafe { m.deref() }.phase) {
                min = Some(candidate);
            }
        }
        let Some(min) = min else { return };
        // SAFETY: protected by `guard`.
        if unsafe { min.deref().phase > request.deref().phase } {
            return;
        }
        self.unique_delete(tid, min, guard);
        if min != request {
            self.unique_delete(tid, request, guard);
        }
    }

    fn unique_delete(&self, tid: usize, request: Shared<'_, DeleteRequest<T>>, guard: &Guard) {
        let state = &self.cleanup;
        // SAFETY: protected by `guard`.
        let req = unsafe { request.deref() };
        let backoff = Backoff::new();
        while req.pending.load(SeqCst) {
            let current = state.unique_request.load(SeqCst, guard);
            // SAFETY: `unique_request` is never null.
            let curr = unsafe { current.deref() };
            if !curr.pending.load(SeqCst) {
                if req.pending.load(SeqCst) {
                    let adopted = if request != current {
                        match state
                            .unique_request
                            .compare_exchange(current, request, SeqCst, SeqCst, guard)
                        {
                            Ok(_) => {
                                state.release(current, LEFT_UNIQUE, guard);
                                true
                            }
                            Err(_) => false,
                        }
                    } else {
                        true
                    };
                    self.help_finish_delete(tid, guard);
                    if adopted {
                        return;
                    }
                }
            } else {
                self.help_finish_delete(tid, guard);
            }
            backoff.snooze();
        }
    }

    /// Finishes whichever delete request is currently adopted.
    pub(crate) fn help_finish_delete(&self, tid: usize, guard: &Guard) {
        let current = self.cleanup.unique_request.load(SeqCst, guard);
        // SAFETY: `unique_request` is never null.
        let curr = unsafe { current.deref() };
        if !curr.pending.load(SeqCst) {
            return;
        }
        // SAFETY: a pending request's base has not been unlinked yet, and the
        // segment is retired only after `pending` is cleared.
        let base_index = unsafe { &*curr.node }.index.load(SeqCst);
        let end_index = base_index + self.w - 1;

        let mut right = self.top.load(SeqCst, guard);
        // SAFETY: chain nodes are protected by `guard`.
        let mut left = unsafe { right.deref() }.prev.load(SeqCst, guard);
        // Indices strictly decrease along the chain, so once we are below
        // `end_index` the range is gone. The sentinel has index 0.
        while unsafe { left.deref() }.index.load(SeqCst) > end_index {
            right = left;
            left = unsafe { left.deref() }.prev.load(SeqCst, guard);
        }
        if self.is_sentinel(left) || unsafe { left.deref() }.index.load(SeqCst) != end_index {
            // `clean` runs only once the right node is on the chain, so a
            // missing left node means the range was already unlinked.
            curr.pending.store(false, SeqCst);
            return;
        }

        let mut target = left;
        for _ in 0..self.w {
            target = unsafe { target.deref() }.prev.load(SeqCst, guard);
        }

        self.observer.step(tid, Step::UnlinkPending);
        // SAFETY: protected by `guard`.
        let right_ref = unsafe { right.deref() };
        let unlinked = right_ref
            .prev
            .compare_exchange(left, target, SeqCst, SeqCst, guard)
            .is_ok();
        curr.pending.store(false, SeqCst);
        if unlinked {
            self.observer
                .unlinked(base_index, right_ref.index.load(SeqCst));
            let mut node = left;
            for _ in 0..self.w {
                let prev = unsafe { node.deref() }.prev.load(SeqCst, guard);
                // SAFETY: the W nodes `[base, left]` are no longer reachable
                // from `top`. Internal links of a range never change, so this
                // walk visits exactly those nodes.
                unsafe { guard.defer_destroy(node) };
                node = prev;
            }
        }
    }
}
