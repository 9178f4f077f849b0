//! Reference stacks: Treiber's lock-free stack, a mutex-guarded stack, and the
//! sequential model the linearizability checker replays against.
//!
//! All of them, and [`WaitFreeStack`], implement [`Lifo`] so harness and test
//! code can be written once over any implementation.

use std::cell::RefCell;
use std::mem::ManuallyDrop;
use std::ptr;
use std::sync::atomic::Ordering::SeqCst;
use std::sync::Mutex;

use crossbeam_epoch::{self as epoch, Atomic, Owned};
use crossbeam_utils::Backoff;

use crate::observer::Observer;
use crate::stack::WaitFreeStack;

/// Push/pop with thread ids. `pop` returns `None` for an empty stack.
pub trait Lifo<T> {
    fn name(&self) -> &'static str;
    fn push(&self, tid: usize, value: T);
    fn pop(&self, tid: usize) -> Option<T>;
}

impl<T, O> Lifo<T> for WaitFreeStack<T, O>
where
    T: Clone + Send + Sync + 'static,
    O: Observer,
{
    fn name(&self) -> &'static str {
        "wf"
    }
    fn push(&self, tid: usize, value: T) {
        WaitFreeStack::push(self, tid, value)
    }
    fn pop(&self, tid: usize) -> Option<T> {
        WaitFreeStack::pop(self, tid)
    }
}

struct TreiberNode<T> {
    value: ManuallyDrop<T>,
    next: Atomic<TreiberNode<T>>,
}

/// Treiber's lock-free stack. Popped nodes are retired through the epoch
/// collector, the same scheme [`WaitFreeStack`] uses.
pub struct TreiberStack<T> {
    top: Atomic<TreiberNode<T>>,
}

impl<T> Default for TreiberStack<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> TreiberStack<T> {
    pub fn new() -> Self {
        TreiberStack {
            top: Atomic::null(),
        }
    }

    pub fn push(&self, value: T) {
        let mut node = Owned::new(TreiberNode {
            value: ManuallyDrop::new(value),
            next: Atomic::null(),
        });
        let guard = &epoch::pin();
        let backoff = Backoff::new();
        loop {
            let top = self.top.load(SeqCst, guard);
            node.next.store(top, SeqCst);
            match self.top.compare_exchange(top, node, SeqCst, SeqCst, guard) {
                Ok(_) => return,
                Err(e) => node = e.new,
            }
            backoff.spin();
        }
    }

    pub fn pop(&self) -> Option<T> {
        let guard = &epoch::pin();
        let backoff = Backoff::new();
        loop {
            let top = self.top.load(SeqCst, guard);
            // SAFETY: protected by `guard`.
            let node = unsafe { top.as_ref() }?;
            let next = node.next.load(SeqCst, guard);
            if self
                .top
                .compare_exchange(top, next, SeqCst, SeqCst, guard)
                .is_ok()
            {
                // SAFETY: the winning exchange made this thread the unique
                // owner of the value; the node itself is freed later.
                unsafe {
                    guard.defer_destroy(top);
                    return Some(ManuallyDrop::into_inner(ptr::read(&node.value)));
                }
            }
            backoff.spin();
        }
    }
}

impl<T> Drop for TreiberStack<T> {
    fn drop(&mut self) {
        // SAFETY: exclusive access.
        unsafe {
            let guard = epoch::unprotected();
            let mut curr = self.top.load(SeqCst, guard);
            while !curr.is_null() {
                let mut owned = curr.into_owned();
                curr = owned.next.load(SeqCst, guard);
                ManuallyDrop::drop(&mut owned.value);
            }
        }
    }
}

impl<T: Send> Lifo<T> for TreiberStack<T> {
    fn name(&self) -> &'static str {
        "treiber"
    }
    fn push(&self, _tid: usize, value: T) {
        TreiberStack::push(self, value)
    }
    fn pop(&self, _tid: usize) -> Option<T> {
        TreiberStack::pop(self)
    }
}

/// A linked list behind one mutex.
#[derive(Default)]
pub struct LockedStack<T> {
    items: Mutex<Vec<T>>,
}

impl<T> LockedStack<T> {
    pub fn new() -> Self {
        LockedStack {
            items: Mutex::new(Vec::new()),
        }
    }
}

impl<T: Send> Lifo<T> for LockedStack<T> {
    fn name(&self) -> &'static str {
        "lock"
    }
    fn push(&self, _tid: usize, value: T) {
        self.items.lock().unwrap().push(value);
    }
    fn pop(&self, _tid: usize) -> Option<T> {
        self.items.lock().unwrap().pop()
    }
}

/// The sequential specification of a stack.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SequentialStackModel<T> {
    items: Vec<T>,
}

impl<T> SequentialStackModel<T> {
    pub fn new() -> Self {
        SequentialStackModel { items: Vec::new() }
    }

    pub fn push(&mut self, value: T) {
        self.items.push(value);
    }

    pub fn pop(&mut self) -> Option<T> {
        self.items.pop()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Contents from bottom to top.
    pub fn items(&self) -> &[T] {
        &self.items
    }
}

/// Single-threaded adapter so the model can run through generic [`Lifo`] code.
impl<T> Lifo<T> for RefCell<SequentialStackModel<T>> {
    fn name(&self) -> &'static str {
        "model"
    }
    fn push(&self, _tid: usize, value: T) {
        self.borrow_mut().push(value)
    }
    fn pop(&self, _tid: usize) -> Option<T> {
        self.borrow_mut().pop()
    }
}
