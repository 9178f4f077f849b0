//! History values and their text encoding.
//!
//! A history file holds one or more histories. Each starts with two header
//! lines followed by one event per line:
//!
//! ```text
//! # wfstack-history v1
//! # impl=wf w=8 seed=42
//! 0 0 inv push 5 -
//! 1 1 inv pop - -
//! 2 0 resp push 5 ok
//! 3 1 resp pop - 5
//! ```
//!
//! Event fields, space separated: `seq thread kind op value result`.
//! `kind` is `inv` or `resp`; `op` is `push` or `pop`; `value` is the pushed
//! value or `-` for pops; `result` is `-` on invocations, `ok` for a completed
//! push, and the popped value or `empty` for a completed pop. Meta fields
//! that are absent are written as `-`. Serializing a parsed canonical file
//! reproduces it byte for byte.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

pub const HEADER: &str = "# wfstack-history v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Invoke,
    Respond,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Push(u64),
    Pop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// A push completed.
    Ack,
    Value(u64),
    Empty,
}

impl Outcome {
    pub fn from_pop(result: Option<u64>) -> Self {
        result.map_or(Outcome::Empty, Outcome::Value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HistoryEvent {
    pub seq: u64,
    pub thread: usize,
    pub kind: EventKind,
    pub op: OpKind,
    /// `None` on invocations.
    pub result: Option<Outcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryMeta {
    pub implementation: String,
    pub w: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    pub meta: HistoryMeta,
    pub events: Vec<HistoryEvent>,
}

/// One invocation with its response, if it has one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Operation {
    pub thread: usize,
    pub op: OpKind,
    pub result: Option<Outcome>,
    pub invoked: u64,
    pub responded: Option<u64>,
}

impl Operation {
    pub fn is_complete(&self) -> bool {
        self.responded.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("event seq {seq}: thread {thread} responded without an open invocation")]
    UnmatchedResponse { seq: u64, thread: usize },
    #[error("event seq {seq}: thread {thread} invoked while another of its operations was open")]
    NestedInvocation { seq: u64, thread: usize },
    #[error("event seq {seq}: response does not match the open invocation of thread {thread}")]
    MismatchedResponse { seq: u64, thread: usize },
    #[error("event seq {seq}: stamps must strictly increase")]
    OutOfOrder { seq: u64 },
}

impl History {
    pub fn new(meta: HistoryMeta, events: Vec<HistoryEvent>) -> Self {
        History { meta, events }
    }

    /// Pairs invocations with responses. Invocations left open at the end of
    /// the history come back with `responded == None`.
    pub fn operations(&self) -> Result<Vec<Operation>, HistoryError> {
        let mut ops: Vec<Operation> = Vec::new();
        let mut open: HashMap<usize, usize> = HashMap::new();
        let mut last_seq: Option<u64> = None;
        for ev in &self.events {
            if last_seq.is_some_and(|s| ev.seq <= s) {
                return Err(HistoryError::OutOfOrder { seq: ev.seq });
            }
            last_seq = Some(ev.seq);
            match ev.kind {
                EventKind::Invoke => {
                    if open.contains_key(&ev.thread) {
                        return Err(HistoryError::NestedInvocation {
                            seq: ev.seq,
                            thread: ev.thread,
                        });
                    }
                    open.insert(ev.thread, ops.len());
                    ops.push(Operation {
                        thread: ev.thread,
                        op: ev.op,
                        result: None,
                        invoked: ev.seq,
                        responded: None,
                    });
                }
                EventKind::Respond => {
                    let Some(i) = open.remove(&ev.thread) else {
                        return Err(HistoryError::UnmatchedResponse {
                            seq: ev.seq,
                            thread: ev.thread,
                        });
                    };
                    let consistent = match (ops[i].op, ev.op, ev.result) {
                        (OpKind::Push(a), OpKind::Push(b), Some(Outcome::Ack)) => a == b,
                        (OpKind::Pop, OpKind::Pop, Some(Outcome::Value(_) | Outcome::Empty)) => {
                            true
                        }
                        _ => false,
                    };
                    if !consistent {
                        return Err(HistoryError::MismatchedResponse {
                            seq: ev.seq,
                            thread: ev.thread,
                        });
                    }
                    ops[i].result = ev.result;
                    ops[i].responded = Some(ev.seq);
                }
            }
        }
        Ok(ops)
    }

    /// Drops invocations that never got a response.
    pub fn complete(&self) -> History {
        let mut open: HashMap<usize, usize> = HashMap::new();
        let mut keep = vec![true; self.events.len()];
        for (i, ev) in self.events.iter().enumerate() {
            match ev.kind {
                EventKind::Invoke => {
                    if let Some(prev) = open.insert(ev.thread, i) {
                        keep[prev] = false;
                    }
                }
                EventKind::Respond => {
                    open.remove(&ev.thread);
                }
            }
        }
        for i in open.into_values() {
            keep[i] = false;
        }
        History {
            meta: self.meta.clone(),
            events: self
                .events
                .iter()
                .zip(keep)
                .filter_map(|(ev, k)| k.then_some(*ev))
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out)
            .expect("writing to a String cannot fail");
        out
    }

    fn write_text(&self, out: &mut String) -> fmt::Result {
        writeln!(out, "{HEADER}")?;
        writeln!(
            out,
            "# impl={} w={} seed={}",
            if self.meta.implementation.is_empty() {
                "-"
            } else {
                &self.meta.implementation
            },
            opt(self.meta.w),
            opt(self.meta.seed)
        )?;
        for ev in &self.events {
            let kind = match ev.kind {
                EventKind::Invoke => "inv",
                EventKind::Respond => "resp",
            };
            let (op, value) = match ev.op {
                OpKind::Push(v) => ("push", v.to_string()),
                OpKind::Pop => ("pop", "-".to_string()),
            };
            let result = match ev.result {
                None => "-".to_string(),
                Some(Outcome::Ack) => "ok".to_string(),
                Some(Outcome::Empty) => "empty".to_string(),
                Some(Outcome::Value(v)) => v.to_string(),
            };
            writeln!(out, "{} {} {kind} {op} {value} {result}", ev.seq, ev.thread)?;
        }
        Ok(())
    }

    /// Parses a text holding exactly one history.
    pub fn parse(text: &str) -> Result<History, HistoryError> {
        let mut all = parse_histories(text)?;
        match all.len() {
            1 => Ok(all.pop().unwrap()),
            n => Err(HistoryError::Parse {
                line: 1,
                message: format!("expected one history, found {n}"),
            }),
        }
    }
}

fn opt(v: Option<u64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn write_histories(histories: &[History]) -> String {
    histories.iter().map(History::to_text).collect()
}

/// Parses a file holding any number of histories.
pub fn parse_histories(text: &str) -> Result<Vec<History>, HistoryError> {
    let mut out: Vec<History> = Vec::new();
    let mut expect_meta = false;
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let err = |message: String| HistoryError::Parse {
            line: lineno,
            message,
        };
        if line == HEADER {
            out.push(History::default());
            expect_meta = true;
            continue;
        }
        let Some(current) = out.last_mut() else {
            return Err(err(format!("expected `{HEADER}`")));
        };
        if expect_meta {
            current.meta = parse_meta(line).map_err(err)?;
            expect_meta = false;
            continue;
        }
        current.events.push(parse_event(line).map_err(err)?);
    }
    if expect_meta {
        return Err(HistoryError::Parse {
            line: text.lines().count(),
            message: "missing meta line".into(),
        });
    }
    Ok(out)
}

fn parse_meta(line: &str) -> Result<HistoryMeta, String> {
    let rest = line
        .strip_prefix("# ")
        .ok_or_else(|| "meta line must start with `# `".to_string())?;
    let fields: Vec<&str> = rest.split(' ').collect();
    let [imp, w, seed] = fields.as_slice() else {
        return Err("meta line must have impl, w and seed".into());
    };
    let value = |field: &str, key: &str| -> Result<String, String> {
        field
            .strip_prefix(key)
            .and_then(|f| f.strip_prefix('='))
            .map(str::to_string)
            .ok_or_else(|| format!("expected `{key}=`"))
    };
    let number = |s: String| -> Result<Option<u64>, String> {
        if s == "-" {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|e| format!("bad number `{s}`: {e}"))
        }
    };
    let implementation = value(imp, "impl")?;
    Ok(HistoryMeta {
        implementation: if implementation == "-" {
            String::new()
        } else {
            implementation
        },
        w: number(value(w, "w")?)?,
        seed: number(value(seed, "seed")?)?,
    })
}

fn parse_event(line: &str) -> Result<HistoryEvent, String> {
    let fields: Vec<&str> = line.split(' ').collect();
    let [seq, thread, kind, op, value, result] = fields.as_slice() else {
        return Err(format!("expected 6 fields, found {}", fields.len()));
    };
    let num = |s: &str| -> Result<u64, String> {
        s.parse::<u64>()
            .map_err(|e| format!("bad number `{s}`: {e}"))
    };
    let kind = match *kind {
        "inv" => EventKind::Invoke,
        "resp" => EventKind::Respond,
        other => return Err(format!("unknown event kind `{other}`")),
    };
    let op = match (*op, *value) {
        ("push", v) => OpKind::Push(num(v)?),
        ("pop", "-") => OpKind::Pop,
        ("pop", v) => return Err(format!("pop carries no value, found `{v}`")),
        (other, _) => return Err(format!("unknown op `{other}`")),
    };
    let result = match (kind, op, *result) {
        (EventKind::Invoke, _, "-") => None,
        (EventKind::Invoke, _, r) => return Err(format!("invocation carries result `{r}`")),
        (EventKind::Respond, OpKind::Push(_), "ok") => Some(Outcome::Ack),
        (EventKind::Respond, OpKind::Pop, "empty") => Some(Outcome::Empty),
        (EventKind::Respond, OpKind::Pop, r) => Some(Outcome::Value(num(r)?)),
        (EventKind::Respond, OpKind::Push(_), r) => {
            return Err(format!("push response must be `ok`, found `{r}`"))
        }
    };
    Ok(HistoryEvent {
        seq: num(seq)?,
        thread: num(thread)? as usize,
        kind,
        op,
        result,
    })
}

/// Builds histories by hand in tests and examples. Stamps are assigned in
/// call order.
#[derive(Debug, Default)]
pub struct HistoryBuilder {
    next_seq: u64,
    open: HashMap<usize, OpKind>,
    history: History,
}

impl HistoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn invoke(mut self, thread: usize, op: OpKind) -> Self {
        self.open.insert(thread, op);
        self.push_event(thread, EventKind::Invoke, op, None);
        self
    }

    /// Responds to the open operation of `thread`. `result` is ignored for
    /// pushes.
    pub fn respond(mut self, thread: usize, result: Outcome) -> Self {
        let op = self.open.remove(&thread).unwrap_or(OpKind::Pop);
        let result = match op {
            OpKind::Push(_) => Outcome::Ack,
            OpKind::Pop => result,
        };
        self.push_event(thread, EventKind::Respond, op, Some(result));
        self
    }

    pub fn push(self, thread: usize, value: u64) -> Self {
        self.invoke(thread, OpKind::Push(value))
            .respond(thread, Outcome::Ack)
    }

    pub fn pop(self, thread: usize, result: Option<u64>) -> Self {
        self.invoke(thread, OpKind::Pop)
            .respond(thread, Outcome::from_pop(result))
    }

    fn push_event(&mut self, thread: usize, kind: EventKind, op: OpKind, result: Option<Outcome>) {
        self.history.events.push(HistoryEvent {
            seq: self.next_seq,
            thread,
            kind,
            op,
            result,
        });
        self.next_seq += 1;
    }

    pub fn build(self) -> History {
        self.history
    }
}
