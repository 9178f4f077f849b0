//! A wait-free concurrent stack with lazy range cleanup.
//!
//! * [`WaitFreeStack`]: phase-ordered helping for push, mark-based pop, and
//!   batched unlinking of W claimed nodes at a time.
//! * [`baselines`]: Treiber's lock-free stack, a locked stack and the
//!   sequential model, all behind the [`Lifo`] trait.
//! * [`lincheck`]: history recording, a text history format, and an
//!   exhaustive linearizability checker.
//! * [`bench`]: seeded workloads, quiescent audits, fairness and structural
//!   statistics, and the report written by the `wfstack-bench` binary.
//!
//! ```
//! use wfstack::WaitFreeStack;
//!
//! let stack = WaitFreeStack::new(2, 8).unwrap();
//! stack.push(0, 1u64);
//! stack.push(1, 2u64);
//! assert_eq!(stack.pop(0), Some(2));
//! assert_eq!(stack.pop(1), Some(1));
//! assert_eq!(stack.pop(0), None);
//! ```

pub mod baselines;
pub mod bench;
mod cleanup;
pub mod error;
pub mod lincheck;
pub mod observer;
mod stack;

pub use baselines::{Lifo, LockedStack, SequentialStackModel, TreiberStack};
pub use error::{ChainError, ConfigError};
pub use observer::{NoopObserver, Observer, Step};
pub use stack::{ChainNode, CleanupMode, StackConfig, WaitFreeStack, DEFAULT_W};
