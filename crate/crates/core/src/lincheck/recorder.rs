use std::sync::atomic::{AtomicU64, Ordering::SeqCst};

use thiserror::Error;

use super::history::{
    EventKind, History, HistoryError, HistoryEvent, HistoryMeta, OpKind, Outcome,
};
use crate::baselines::Lifo;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("thread {thread} exceeded its history buffer of {capacity} events")]
    CapacityExceeded { thread: usize, capacity: usize },
    #[error("malformed history: {0}")]
    Malformed(#[from] HistoryError),
}

/// Hands out per-thread event buffers stamped from one shared clock.
///
/// A stamp is taken right before an operation is invoked and right after it
/// returns, so if one operation's response stamp is below another's
/// invocation stamp the first really finished before the second started.
#[derive(Debug)]
pub struct Recorder {
    clock: AtomicU64,
    capacity: usize,
}

impl Recorder {
    pub fn new(capacity_per_thread: usize) -> Self {
        Recorder {
            clock: AtomicU64::new(0),
            capacity: capacity_per_thread,
        }
    }

    pub fn thread_log(&self, thread: usize) -> ThreadLog<'_> {
        ThreadLog {
            recorder: self,
            thread,
            events: Vec::with_capacity(self.capacity.min(1 << 16)),
        }
    }

    /// Merges per-thread logs by stamp. Trailing open invocations are
    /// truncated; any other malformation is an error.
    pub fn merge<'a, I>(&self, logs: I, meta: HistoryMeta) -> Result<History, RecordError>
    where
        I: IntoIterator<Item = ThreadLog<'a>>,
    {
        let mut events: Vec<HistoryEvent> = logs.into_iter().flat_map(|l| l.events).collect();
        events.sort_by_key(|e| e.seq);
        let history = History::new(meta, events);
        history.operations()?;
        Ok(history.complete())
    }
}

pub struct ThreadLog<'a> {
    recorder: &'a Recorder,
    thread: usize,
    events: Vec<HistoryEvent>,
}

impl ThreadLog<'_> {
    pub fn thread(&self) -> usize {
        self.thread
    }

    pub fn record(
        &mut self,
        kind: EventKind,
        op: OpKind,
        result: Option<Outcome>,
    ) -> Result<u64, RecordError> {
        if self.events.len() >= self.recorder.capacity {
            return Err(RecordError::CapacityExceeded {
                thread: self.thread,
                capacity: self.recorder.capacity,
            });
        }
        let seq = self.recorder.clock.fetch_add(1, SeqCst);
        self.events.push(HistoryEvent {
            seq,
            thread: self.thread,
            kind,
            op,
            result,
        });
        Ok(seq)
    }

    /// Pushes `value` on `stack` and records the invocation and response.
    pub fn push<S: Lifo<u64> + ?Sized>(
        &mut self,
        stack: &S,
        value: u64,
    ) -> Result<(), RecordError> {
        let op = OpKind::Push(value);
        self.record(EventKind::Invoke, op, None)?;
        stack.push(self.thread, value);
        self.record(EventKind::Respond, op, Some(Outcome::Ack))?;
        Ok(())
    }

    pub fn pop<S: Lifo<u64> + ?Sized>(&mut self, stack: &S) -> Result<Option<u64>, RecordError> {
        self.record(EventKind::Invoke, OpKind::Pop, None)?;
        let result = stack.pop(self.thread);
        self.record(
            EventKind::Respond,
            OpKind::Pop,
            Some(Outcome::from_pop(result)),
        )?;
        Ok(result)
    }
}
