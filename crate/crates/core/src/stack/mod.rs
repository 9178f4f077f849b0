//! The wait-free stack.
//!
//! Pushes announce a request tagged with a phase number and help the oldest
//! pending request first. A push completes in three ordered steps: the new
//! node is linked into `top.next_done`, the request's `pushed` flag is set,
//! and `top` is swung to the new node. Pops never write `top`; they walk the
//! predecessor chain from one snapshot of `top` and claim the first node whose
//! mark they flip. Claimed nodes are unlinked lazily, `W` at a time, by the
//! cleanup pipeline in [`crate::cleanup`].

mod node;

use std::sync::atomic::{AtomicI64, Ordering::SeqCst};

use crossbeam_epoch::{self as epoch, Atomic, Guard, Owned, Shared};
use crossbeam_utils::Backoff;

use crate::cleanup::{CleanupState, VoteSource};
use crate::error::{ChainError, ConfigError};
use crate::observer::{NoopObserver, Observer, Step};

pub(crate) use node::{Node, PushOp, DONE};

/// Default range width.
pub const DEFAULT_W: u64 = 8;

/// Which node a cleanup vote walk starts from.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum CleanupMode {
    /// Every vote walk starts at the predecessor of the node that triggered it.
    /// Pops of `(base, base + W]` then vote for `base` while the unlink removes
    /// `[base, base + W - 1]`, so a base node can be unlinked before it is
    /// popped.
    PaperFaithful,
    /// Pops vote starting from the claimed node itself; pushes of a range's
    /// right node still start from its predecessor. The W + 1 votes for a base
    /// then come from exactly the W nodes the unlink removes plus the push of
    /// the right node.
    #[default]
    Corrected,
}

impl std::fmt::Display for CleanupMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CleanupMode::PaperFaithful => "paper",
            CleanupMode::Corrected => "corrected",
        })
    }
}

impl std::str::FromStr for CleanupMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" | "paper-faithful" => Ok(CleanupMode::PaperFaithful),
            "corrected" => Ok(CleanupMode::Corrected),
            other => Err(format!("unknown cleanup mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StackConfig {
    pub threads: usize,
    pub w: u64,
    pub cleanup_mode: CleanupMode,
}

impl StackConfig {
    pub fn new(threads: usize, w: u64) -> Self {
        StackConfig {
            threads,
            w,
            cleanup_mode: CleanupMode::default(),
        }
    }

    pub fn cleanup_mode(mut self, mode: CleanupMode) -> Self {
        self.cleanup_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.threads < 1 {
            return Err(ConfigError::NoThreads(self.threads));
        }
        if self.w < 2 {
            return Err(ConfigError::RangeTooNarrow(self.w));
        }
        Ok(())
    }
}

/// Summary of one node on the predecessor chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainNode {
    pub index: u64,
    pub marked: bool,
    pub counter: usize,
}

/// A wait-free stack shared by a fixed set of `threads` registered threads.
///
/// Each registered thread passes its own id in `0..threads` to [`push`] and
/// [`pop`]; two threads must never use the same id at the same time.
///
/// [`push`]: WaitFreeStack::push
/// [`pop`]: WaitFreeStack::pop
pub struct WaitFreeStack<T, O = NoopObserver> {
    pub(crate) top: Atomic<Node<T>>,
    pub(crate) sentinel: *const Node<T>,
    announce: Box<[Atomic<PushOp<T>>]>,
    global_phase: AtomicI64,
    pub(crate) w: u64,
    pub(crate) mode: CleanupMode,
    pub(crate) cleanup: CleanupState<T>,
    pub(crate) observer: O,
}

unsafe impl<T: Send + Sync, O: Send + Sync> Send for WaitFreeStack<T, O> {}
unsafe impl<T: Send + Sync, O: Send + Sync> Sync for WaitFreeStack<T, O> {}

impl<T> WaitFreeStack<T, NoopObserver>
where
    T: Clone + Send + Sync + 'static,
{
    /// Creates a stack for `threads` threads with range width `w` and the
    /// default cleanup mode.
    pub fn new(threads: usize, w: u64) -> Result<Self, ConfigError> {
        Self::with_observer(StackConfig::new(threads, w), NoopObserver)
    }

    pub fn with_config(config: StackConfig) -> Result<Self, ConfigError> {
        Self::with_observer(config, NoopObserver)
    }
}

impl<T, O> WaitFreeStack<T, O>
where
    T: Clone + Send + Sync + 'static,
    O: Observer,
{
    pub fn with_observer(config: StackConfig, observer: O) -> Result<Self, ConfigError> {
        config.validate()?;
        let sentinel = Box::into_raw(Box::new(Node::sentinel()));
        // SAFETY: freshly allocated, not shared yet.
        unsafe {
            (*sentinel)
                .prev
                .store(Shared::from(sentinel as *const _), SeqCst);
        }
        let announce = (0..config.threads)
            .map(|_| Atomic::new(PushOp::dummy()))
            .collect();
        Ok(WaitFreeStack {
            top: Atomic::from(sentinel as *const Node<T>),
            sentinel,
            announce,
            global_phase: AtomicI64::new(0),
            w: config.w,
            mode: config.cleanup_mode,
            cleanup: CleanupState::new(config.threads),
            observer,
        })
    }

    pub fn threads(&self) -> usize {
        self.announce.len()
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn cleanup_mode(&self) -> CleanupMode {
        self.mode
    }

    pub fn observer(&self) -> &O {
        &self.observer
    }

    fn check_tid(&self, tid: usize) {
        assert!(
            tid < self.announce.len(),
            "thread id {tid} is not registered (stack has {} threads)",
            self.announce.len()
        );
    }

    #[inline]
    pub(crate) fn is_sentinel(&self, node: Shared<'_, Node<T>>) -> bool {
        node.as_raw() == self.sentinel
    }

    /// Pushes `value` on behalf of thread `tid`.
    pub fn push(&self, tid: usize, value: T) {
        self.check_tid(tid);
        let guard = &epoch::pin();
        let phase = self.global_phase.fetch_add(1, SeqCst);
        let node = Owned::new(Node::new(value, tid)).into_shared(guard);
        let request = Owned::new(PushOp {
            phase,
            pushed: std::sync::atomic::AtomicBool::new(false),
            node: node.as_raw(),
        })
        .into_shared(guard);
        let old = self.announce[tid].swap(request, SeqCst, guard);
        // SAFETY: the old request is unreachable from the announce array now;
        // helpers that still hold it are pinned.
        unsafe { guard.defer_destroy(old) };
        self.help(tid, request, guard);
        // `pushed` is raised before `top` moves. If a helper stalled between
        // the two, finish the swing here so the push takes effect before
        // it returns.
        self.update_top(tid, guard);
    }

    fn help(&self, tid: usize, request: Shared<'_, PushOp<T>>, guard: &Guard) {
        let mut min: Option<Shared<'_, PushOp<T>>> = None;
        for slot in self.announce.iter() {
            let candidate = slot.load(SeqCst, guard);
            // SAFETY: announce slots are never null and are retired through the epoch.
            let c = unsafe { candidate.deref() };
            if c.pushed.load(SeqCst) {
                continue;
            }
            // Strict `<` keeps the lowest tid on a (theoretical) phase tie.
            if min.is_none_or(|m| c.phase < unsafe { m.deref() }.phase) {
                min = Some(candidate);
            }
        }
        let Some(min) = min else { return };
        // SAFETY: both requests are protected by `guard`.
        if unsafe { min.deref().phase > request.deref().phase } {
            return;
        }
        self.attach_node(tid, min, guard);
        if min != request {
            self.attach_node(tid, request, guard);
        }
    }

    fn attach_node(&self, tid: usize, request: Shared<'_, PushOp<T>>, guard: &Guard) {
        // SAFETY: protected by `guard`.
        let req = unsafe { request.deref() };
        let backoff = Backoff::new();
        while !req.pushed.load(SeqCst) {
            let last = self.top.load(SeqCst, guard);
            // SAFETY: `top` is never null and never retired while reachable.
            let last_ref = unsafe { last.deref() };
            let next_done = last_ref.next_done.load(SeqCst, guard);
            self.observer.step(tid, Step::AttachReadTop);
            if last == self.top.load(SeqCst, guard) {
                if next_done.is_null() && next_done.tag() != DONE {
                    if !req.pushed.load(SeqCst) {
                        let my_node = Shared::from(req.node);
                        if last_ref
                            .next_done
                            .compare_exchange(Shared::null(), my_node, SeqCst, SeqCst, guard)
                            .is_ok()
                        {
                            self.observer.step(tid, Step::AttachLinked);
                            self.update_top(tid, guard);
                            let _ = last_ref.next_done.compare_exchange(
                                my_node,
                                Shared::null().with_tag(DONE),
                                SeqCst,
                                SeqCst,
                                guard,
                            );
                            return;
                        }
                    }
                } else if next_done.tag() == DONE {
                    self.debug_check_moved_past(last_ref, guard);
                }
                self.update_top(tid, guard);
            }
            backoff.snooze();
        }
    }

    fn update_top(&self, tid: usize, guard: &Guard) {
        let last = self.top.load(SeqCst, guard);
        // SAFETY: see `attach_node`.
        let last_ref = unsafe { last.deref() };
        let next = last_ref.next_done.load(SeqCst, guard);
        if next.is_null() {
            if next.tag() == DONE {
                self.debug_check_moved_past(last_ref, guard);
            }
            return;
        }
        // SAFETY: a half-attached node is reachable from `last` and protected.
        let next_ref = unsafe { next.deref() };
        let request = self.announce[next_ref.push_tid].load(SeqCst, guard);
        // SAFETY: announce slots are never null.
        let req = unsafe { request.deref() };
        if last == self.top.load(SeqCst, guard) && req.node == next.as_raw() {
            let _ = next_ref
                .prev
                .compare_exchange(Shared::null(), last, SeqCst, SeqCst, guard);
            let index = last_ref.index.load(SeqCst) + 1;
            next_ref.index.store(index, SeqCst);
            req.pushed.store(true, SeqCst);
            self.observer.step(tid, Step::TopSwingPending);
            let swung = self
                .top
                .compare_exchange(last, next, SeqCst, SeqCst, guard)
                .is_ok();
            if swung {
                self.observer.top_advanced(index);
                if index % self.w == 0 {
                    self.try_clean_up(tid, next, VoteSource::Push, guard);
                }
            }
        }
    }

    #[inline]
    fn debug_check_moved_past(&self, node: &Node<T>, guard: &Guard) {
        if cfg!(debug_assertions) {
            // SAFETY: `top` is never null.
            let top_index = unsafe { self.top.load(SeqCst, guard).deref() }
                .index
                .load(SeqCst);
            let index = node.index.load(SeqCst);
            debug_assert!(
                top_index > index,
                "next_done of node {index} is done while top is still {top_index}"
            );
        }
    }

    /// Pops on behalf of thread `tid`. Returns `None` when no unmarked node is
    /// reachable from the snapshot of `top` taken at the start of the call.
    pub fn pop(&self, tid: usize) -> Option<T> {
        self.check_tid(tid);
        let guard = &epoch::pin();
        let mut curr = self.top.load(SeqCst, guard);
        let mut visited = 0usize;
        while !self.is_sentinel(curr) {
            visited += 1;
            // SAFETY: nodes reachable from a snapshot of `top` stay allocated
            // while the guard is held, even after they are unlinked.
            let node = unsafe { curr.deref() };
            if !node.mark.swap(true, SeqCst) {
                break;
            }
            curr = node.prev.load(SeqCst, guard);
        }
        self.observer.pop_traversal(visited);
        if self.is_sentinel(curr) {
            return None;
        }
        // SAFETY: as above.
        let node = unsafe { curr.deref() };
        self.observer.node_marked(node.index.load(SeqCst));
        self.observer.step(tid, Step::PopMarked);
        self.try_clean_up(tid, curr, VoteSource::Pop, guard);
        node.value.clone()
    }

    /// Index of the current top node (0 for the sentinel).
    pub fn top_index(&self) -> u64 {
        let guard = &epoch::pin();
        // SAFETY: `top` is never null.
        unsafe { self.top.load(SeqCst, guard).deref() }
            .index
            .load(SeqCst)
    }

    fn walk<F>(&self, mut visit: F) -> Result<usize, ChainError>
    where
        F: FnMut(&Node<T>),
    {
        let guard = &epoch::pin();
        let mut curr = self.top.load(SeqCst, guard);
        // SAFETY: `top` is never null.
        let bound = unsafe { curr.deref() }.index.load(SeqCst) as usize + 1;
        let mut hops = 0usize;
        let mut upper: Option<u64> = None;
        while !self.is_sentinel(curr) {
            if hops >= bound {
                return Err(ChainError::Unterminated(bound));
            }
            // SAFETY: protected by `guard`.
            let node = unsafe { curr.deref() };
            let index = node.index.load(SeqCst);
            if let Some(upper) = upper {
                if index >= upper {
                    return Err(ChainError::NonDecreasing {
                        upper,
                        lower: index,
                    });
                }
            }
            upper = Some(index);
            visit(node);
            hops += 1;
            curr = node.prev.load(SeqCst, guard);
        }
        Ok(hops)
    }

    /// Hop count of the predecessor chain from `top` down to the sentinel.
    /// Fails if the chain is not strictly decreasing in index.
    pub fn physical_len(&self) -> Result<usize, ChainError> {
        self.walk(|_| {})
    }

    /// The nodes currently on the chain, from `top` downwards.
    pub fn chain(&self) -> Result<Vec<ChainNode>, ChainError> {
        let mut nodes = Vec::new();
        self.walk(|node| {
            nodes.push(ChainNode {
                index: node.index.load(SeqCst),
                marked: node.mark.load(SeqCst),
                counter: node.counter.load(SeqCst),
            })
        })?;
        Ok(nodes)
    }

    /// Values of the unmarked nodes still on the chain, in pop order.
    pub fn unmarked_values(&self) -> Result<Vec<T>, ChainError> {
        let mut values = Vec::new();
        self.walk(|node| {
            if !node.mark.load(SeqCst) {
                values.extend(node.value.clone());
            }
        })?;
        Ok(values)
    }
}

impl<T, O> Drop for WaitFreeStack<T, O> {
    fn drop(&mut self) {
        // SAFETY: `&mut self` means no operation is in flight. Nodes on the
        // chain are owned by the stack; unlinked nodes were already retired.
        unsafe {
            let guard = epoch::unprotected();
            let mut curr = self.top.load(SeqCst, guard);
            while curr.as_raw() != self.sentinel {
                let prev = curr.deref().prev.load(SeqCst, guard);
                drop(curr.into_owned());
                curr = prev;
            }
            drop(Box::from_raw(self.sentinel as *mut Node<T>));
            for slot in self.announce.iter() {
                let op = slot.load(SeqCst, guard);
                if !op.is_null() {
                    drop(op.into_owned());
                }
            }
            self.cleanup.free_all(guard);
        }
    }
}

#[cfg(test)]
mod tests;
