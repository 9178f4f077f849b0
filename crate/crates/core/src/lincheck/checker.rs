use std::collections::HashSet;

use thiserror::Error;

use super::history::{EventKind, History, HistoryError, OpKind, Operation, Outcome};

pub const DEFAULT_MAX_OPS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("history has {ops} operations, the checker bound is {max}")]
    BoundExceeded { ops: usize, max: usize },
    #[error(transparent)]
    Malformed(#[from] HistoryError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// A legal sequential order that respects real time. Open invocations
    /// that were left out of the order are not listed.
    Linearizable { witness: Vec<Operation> },
    /// The shortest prefix of the history, cut right after a response, that
    /// already has no linearization.
    Violation { prefix: History },
}

impl Verdict {
    pub fn is_linearizable(&self) -> bool {
        matches!(self, Verdict::Linearizable { .. })
    }
}

/// Exhaustive search for a linearization, memoized on the set of linearized
/// operations and the resulting stack contents.
///
/// Open invocations may be placed anywhere after their invocation or left out.
#[derive(Debug, Clone, Copy)]
pub struct Checker {
    max_ops: usize,
}

impl Default for Checker {
    fn default() -> Self {
        Checker {
            max_ops: DEFAULT_MAX_OPS,
        }
    }
}

impl Checker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Raises or lowers the operation bound. The memo key is a 64-bit mask.
    pub fn with_max_ops(max_ops: usize) -> Self {
        Checker {
            max_ops: max_ops.min(64),
        }
    }

    pub fn max_ops(&self) -> usize {
        self.max_ops
    }

    pub fn check(&self, history: &History) -> Result<Verdict, CheckError> {
        let ops = history.operations()?;
        if ops.len() > self.max_ops {
            return Err(CheckError::BoundExceeded {
                ops: ops.len(),
                max: self.max_ops,
            });
        }
        if let Some(witness) = linearize(&ops) {
            return Ok(Verdict::Linearizable { witness });
        }
        // Find the earliest response after which no linearization exists.
        let cuts = history
            .events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.kind == EventKind::Respond)
            .map(|(i, _)| i + 1);
        for cut in cuts {
            let prefix = History::new(history.meta.clone(), history.events[..cut].to_vec());
            let prefix_ops = prefix.operations()?;
            if linearize(&prefix_ops).is_none() {
                return Ok(Verdict::Violation { prefix });
            }
        }
        // Unreachable for a well-formed history, since the full history is
        // itself a candidate cut when it ends in a response.
        Ok(Verdict::Violation {
            prefix: history.clone(),
        })
    }
}

pub fn check_linearizable(history: &History) -> Result<Verdict, CheckError> {
    Checker::default().check(history)
}

fn linearize(ops: &[Operation]) -> Option<Vec<Operation>> {
    let mut search = Search {
        ops,
        memo: HashSet::new(),
        stack: Vec::new(),
        order: Vec::new(),
        complete_mask: ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_complete())
            .fold(0u64, |m, (i, _)| m | 1 << i),
    };
    search
        .run(0)
        .then(|| search.order.iter().map(|&i| ops[i]).collect())
}

struct Search<'a> {
    ops: &'a [Operation],
    memo: HashSet<(u64, Vec<u64>)>,
    stack: Vec<u64>,
    order: Vec<usize>,
    complete_mask: u64,
}

impl Search<'_> {
    fn run(&mut self, done: u64) -> bool {
        if done & self.complete_mask == self.complete_mask {
            return true;
        }
        if !self.memo.insert((done, self.stack.clone())) {
            return false;
        }
        // An operation can go next only if it was invoked before every
        // remaining completed operation responded.
        let horizon = self
            .ops
            .iter()
            .enumerate()
            .filter(|(i, _)| done & (1 << i) == 0)
            .filter_map(|(_, o)| o.responded)
            .min()
            .unwrap_or(u64::MAX);
        for i in 0..self.ops.len() {
            let op = self.ops[i];
            if done & (1 << i) != 0 || op.invoked > horizon {
                continue;
            }
            match op.op {
                OpKind::Push(v) => {
                    self.stack.push(v);
                    self.order.push(i);
                    if self.run(done | 1 << i) {
                        return true;
                    }
                    self.order.pop();
                    self.stack.pop();
                }
                OpKind::Pop => {
                    let top = self.stack.last().copied();
                    let legal = match op.result {
                        None => true,
                        Some(Outcome::Value(v)) => top == Some(v),
                        Some(Outcome::Empty) => top.is_none(),
                        Some(Outcome::Ack) => false,
                    };
                    if !legal {
                        continue;
                    }
                    self.stack.pop();
                    self.order.push(i);
                    if self.run(done | 1 << i) {
                        return true;
                    }
                    self.order.pop();
                    if let Some(v) = top {
                        self.stack.push(v);
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lincheck::history::HistoryBuilder;
    use crate::SequentialStackModel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn replay(witness: &[Operation]) -> bool {
        let mut model = SequentialStackModel::new();
        witness.iter().all(|op| match (op.op, op.result) {
            (OpKind::Push(v), _) => {
                model.push(v);
                true
            }
            (OpKind::Pop, r) => {
                let got = model.pop();
                r.is_none_or(|r| r == Outcome::from_pop(got))
            }
        })
    }

    fn ops_count(h: &History) -> usize {
        h.operations().unwrap().len()
    }

    #[test]
    fn duplicate_pop_is_rejected() {
        let h = HistoryBuilder::new()
            .push(0, 1)
            .pop(1, Some(1))
            .pop(2, Some(1))
            .build();
        let Verdict::Violation { prefix } = check_linearizable(&h).unwrap() else {
            panic!("accepted a duplicate pop");
        };
        assert_eq!(ops_count(&prefix), 3);
    }

    #[test]
    fn empty_after_completed_push_is_rejected() {
        let h = HistoryBuilder::new()
            .push(0, 7)
            .pop(1, None)
            .push(0, 8)
            .pop(1, Some(8))
            .build();
        let Verdict::Violation { prefix } = check_linearizable(&h).unwrap() else {
            panic!("accepted Empty on a non-empty stack");
        };
        assert_eq!(ops_count(&prefix), 2);
    }

    #[test]
    fn fifo_order_is_rejected() {
        let h = HistoryBuilder::new()
            .push(0, 1)
            .push(0, 2)
            .pop(1, Some(1))
            .pop(1, Some(2))
            .build();
        assert!(!check_linearizable(&h).unwrap().is_linearizable());
    }

    #[test]
    fn overlapping_pop_may_see_empty() {
        // push(1) completes; pop R and pop Rj then overlap; Rj takes 1 and R
        // reports Empty by linearizing after Rj.
        use super::super::history::OpKind::Pop;
        let h = HistoryBuilder::new()
            .push(0, 1)
            .invoke(1, Pop)
            .invoke(2, Pop)
            .respond(2, Outcome::Value(1))
            .respond(1, Outcome::Empty)
            .build();
        let Verdict::Linearizable { witness } = check_linearizable(&h).unwrap() else {
            panic!("rejected a linearizable history");
        };
        assert_eq!(witness.len(), 3);
        assert_eq!(witness[2].result, Some(Outcome::Empty));
        assert!(replay(&witness));
    }

    #[test]
    fn open_invocations_are_optional() {
        let h = HistoryBuilder::new()
            .invoke(0, OpKind::Push(3))
            .pop(1, Some(3))
            .build();
        assert!(check_linearizable(&h).unwrap().is_linearizable());
        let h = HistoryBuilder::new()
            .invoke(0, OpKind::Pop)
            .push(1, 3)
            .pop(2, Some(3))
            .build();
        assert!(check_linearizable(&h).unwrap().is_linearizable());
    }

    #[test]
    fn bound_is_enforced() {
        let mut b = HistoryBuilder::new();
        for v in 0..17 {
            b = b.push(0, v);
        }
        assert_eq!(
            check_linearizable(&b.build()),
            Err(CheckError::BoundExceeded { ops: 17, max: 16 })
        );
    }

    /// Builds a history by running the sequential model on a random
    /// interleaving, with each operation's interval stretched around its
    /// linearization point.
    fn model_history(rng: &mut ChaCha8Rng, threads: usize, ops: usize) -> History {
        use super::super::history::{HistoryEvent, HistoryMeta};
        let mut model = SequentialStackModel::new();
        let mut events = Vec::new();
        let mut open: Vec<Option<(OpKind, Option<Outcome>)>> = vec![None; threads];
        let mut started = 0;
        let mut clock = 0u64;
        let mut next_value = 1u64;
        loop {
            let idle: Vec<usize> = (0..threads).filter(|&t| open[t].is_none()).collect();
            let busy: Vec<usize> = (0..threads).filter(|&t| open[t].is_some()).collect();
            if busy.is_empty() && started == ops {
                break;
            }
            let t = if started < ops && !idle.is_empty() && (busy.is_empty() || rng.gen_bool(0.5)) {
                idle[rng.gen_range(0..idle.len())]
            } else {
                busy[rng.gen_range(0..busy.len())]
            };
            match open[t] {
                None => {
                    started += 1;
                    let op = if rng.gen_bool(0.55) {
                        next_value += 1;
                        OpKind::Push(next_value)
                    } else {
                        OpKind::Pop
                    };
                    events.push(HistoryEvent {
                        seq: clock,
                        thread: t,
                        kind: EventKind::Invoke,
                        op,
                        result: None,
                    });
                    open[t] = Some((op, None));
                }
                Some((op, None)) => {
                    // Take effect now; respond on a later step.
                    let r = match op {
                        OpKind::Push(v) => {
                            model.push(v);
                            Outcome::Ack
                        }
                        OpKind::Pop => Outcome::from_pop(model.pop()),
                    };
                    open[t] = Some((op, Some(r)));
                    clock += 1;
                    continue;
                }
                Some((op, Some(r))) => {
                    events.push(HistoryEvent {
                        seq: clock,
                        thread: t,
                        kind: EventKind::Respond,
                        op,
                        result: Some(r),
                    });
                    open[t] = None;
                }
            }
            clock += 1;
        }
        History::new(HistoryMeta::default(), events)
    }

    #[test]
    fn model_histories_are_accepted() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..1000 {
            let threads = rng.gen_range(1..=4);
            let ops = rng.gen_range(1..=12);
            let h = model_history(&mut rng, threads, ops);
            match check_linearizable(&h).unwrap() {
                Verdict::Linearizable { witness } => assert!(replay(&witness)),
                Verdict::Violation { prefix } => panic!("rejected:\n{}", prefix.to_text()),
            }
        }
    }
}
