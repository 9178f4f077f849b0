//! Instrumentation hooks.
//!
//! Every stack in this crate is generic over an [`Observer`]. All methods have
//! empty default bodies, so [`NoopObserver`] compiles down to nothing on the
//! hot paths. The benchmark harness and the test suites plug in observers that
//! count events, check invariants online or pause threads at chosen steps.

use std::sync::Arc;

/// Named points inside the wait-free stack's algorithms.
///
/// [`Observer::step`] is called when a thread reaches one of these points,
/// which lets a test scheduler park a thread in the middle of an operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// `attach_node` read `top` and its `next_done` pair.
    AttachReadTop,
    /// `attach_node` won the `(null, false) -> (node, false)` exchange and has
    /// not yet called `update_top`.
    AttachLinked,
    /// `update_top` set the request's `pushed` flag and is about to swing `top`.
    TopSwingPending,
    /// `pop` marked a node and has not yet run the cleanup vote.
    PopMarked,
    /// `help_finish_delete` located the range and is about to unlink it.
    UnlinkPending,
}

pub trait Observer: Send + Sync {
    /// `top` moved to the node with `index`.
    fn top_advanced(&self, _index: u64) {}

    /// A pop claimed the node with `index`.
    fn node_marked(&self, _index: u64) {}

    /// A pop finished after visiting `visited` nodes (the claimed node included).
    fn pop_traversal(&self, _visited: usize) {}

    /// A cleanup vote raised the counter of `base_index` to `count`.
    fn vote(&self, _base_index: u64, _count: usize) {}

    /// `clean` was entered for the range starting at `base_index`.
    fn clean_invoked(&self, _base_index: u64) {}

    /// The range starting at `base_index` was unlinked; `right_index` is the
    /// node whose predecessor link was redirected.
    fn unlinked(&self, _base_index: u64, _right_index: u64) {}

    /// Thread `tid` reached `step`.
    fn step(&self, _tid: usize, _step: Step) {}
}

/// Observer that ignores every event.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopObserver;

impl Observer for NoopObserver {}

impl<O: Observer + ?Sized> Observer for Arc<O> {
    fn top_advanced(&self, index: u64) {
        (**self).top_advanced(index)
    }
    fn node_marked(&self, index: u64) {
        (**self).node_marked(index)
    }
    fn pop_traversal(&self, visited: usize) {
        (**self).pop_traversal(visited)
    }
    fn vote(&self, base_index: u64, count: usize) {
        (**self).vote(base_index, count)
    }
    fn clean_invoked(&self, base_index: u64) {
        (**self).clean_invoked(base_index)
    }
    fn unlinked(&self, base_index: u64, right_index: u64) {
        (**self).unlinked(base_index, right_index)
    }
    fn step(&self, tid: usize, step: Step) {
        (**self).step(tid, step)
    }
}
