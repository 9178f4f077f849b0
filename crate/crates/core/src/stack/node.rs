use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize};

use crossbeam_epoch::Atomic;

/// Tag bit carried by `next_done` once the successor link has been retired.
pub(crate) const DONE: usize = 1;

/// One stack cell.
///
/// `next_done` packs the successor reference and the done flag into a single
/// tagged word, so both halves change in one compare-exchange. It moves from
/// `(null, false)` to `(node, false)` when a push wins the slot above this node
/// and then to `(null, true)` once `top` has moved past this node.
pub(crate) struct Node<T> {
    /// `None` only for the sentinel.
    pub(crate) value: Option<T>,
    pub(crate) next_done: Atomic<Node<T>>,
    pub(crate) prev: Atomic<Node<T>>,
    pub(crate) mark: AtomicBool,
    pub(crate) push_tid: usize,
    pub(crate) index: AtomicU64,
    pub(crate) counter: AtomicUsize,
}

impl<T> Node<T> {
    pub(crate) fn new(value: T, push_tid: usize) -> Self {
        Node {
            value: Some(value),
            next_done: Atomic::null(),
            prev: Atomic::null(),
            mark: AtomicBool::new(false),
            push_tid,
            index: AtomicU64::new(0),
            counter: AtomicUsize::new(0),
        }
    }

    pub(crate) fn sentinel() -> Self {
        Node {
            value: None,
            next_done: Atomic::null(),
            prev: Atomic::null(),
            mark: AtomicBool::new(false),
            push_tid: usize::MAX,
            index: AtomicU64::new(0),
            counter: AtomicUsize::new(0),
        }
    }
}

/// An announced push request.
pub(crate) struct PushOp<T> {
    pub(crate) phase: i64,
    pub(crate) pushed: AtomicBool,
    pub(crate) node: *const Node<T>,
}

impl<T> PushOp<T> {
    pub(crate) fn dummy() -> Self {
        PushOp {
            phase: -1,
            pushed: AtomicBool::new(true),
            node: std::ptr::null(),
        }
    }
}
