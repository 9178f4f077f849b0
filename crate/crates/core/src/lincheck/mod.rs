//! Recording concurrent histories and checking them for linearizability
//! against the sequential stack.

mod checker;
mod history;
mod recorder;

pub use checker::{check_linearizable, CheckError, Checker, Verdict, DEFAULT_MAX_OPS};
pub use history::{
    parse_histories, write_histories, EventKind, History, HistoryBuilder, HistoryError,
    HistoryEvent, HistoryMeta, OpKind, Operation, Outcome, HEADER,
};
pub use recorder::{RecordError, Recorder, ThreadLog};
