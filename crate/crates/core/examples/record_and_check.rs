//! Recording short concurrent windows and checking them for linearizability.
//!
//! Histories are written in the plain text format, parsed back and checked
//! again; the two verdicts must agree.

use wfstack::bench::{run_windows, WindowConfig};
use wfstack::lincheck::{parse_histories, write_histories, Checker, HistoryMeta, Verdict};
use wfstack::WaitFreeStack;

fn main() {
    let threads = 3;
    let stack = WaitFreeStack::new(threads, 2).unwrap();
    let meta = HistoryMeta {
        implementation: "wf".into(),
        w: Some(2),
        seed: Some(5),
    };
    let run = run_windows(&stack, threads, 0.6, 5, WindowConfig::new(12, 500), meta).unwrap();

    let checker = Checker::new();
    let ok = run
        .histories
        .iter()
        .filter(|h| checker.check(h).is_ok_and(|v| v.is_linearizable()))
        .count();
    println!("{ok}/{} windows linearizable", run.histories.len());

    let text = write_histories(&run.histories);
    let back = parse_histories(&text).unwrap();
    assert_eq!(back, run.histories);
    println!("first window:\n{}", back[0].to_text());

    if let Ok(Verdict::Linearizable { witness }) = checker.check(&back[0]) {
        println!("one valid order:");
        for op in witness {
            println!("  t{} {:?} -> {:?}", op.thread, op.op, op.result);
        }
    }
}
