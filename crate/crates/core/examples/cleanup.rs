//! Watching range cleanup through an observer.
//!
//! Nodes are grouped into ranges of W by push index. When every node of a
//! range has been popped, the range is unlinked from the chain in one step.

use std::sync::Mutex;

use wfstack::{ChainNode, Observer, StackConfig, WaitFreeStack};

#[derive(Default)]
struct Log(Mutex<Vec<String>>);

impl Observer for Log {
    fn vote(&self, base: u64, count: usize) {
        self.0
            .lock()
            .unwrap()
            .push(format!("vote base {base} -> {count}"));
    }
    fn clean_invoked(&self, base: u64) {
        self.0.lock().unwrap().push(format!("clean base {base}"));
    }
    fn unlinked(&self, base: u64, right: u64) {
        self.0
            .lock()
            .unwrap()
            .push(format!("unlink range at {base}, relinked below {right}"));
    }
}

fn show(label: &str, chain: &[ChainNode]) {
    let nodes: Vec<String> = chain
        .iter()
        .map(|n| format!("{}{}", n.index, if n.marked { "*" } else { "" }))
        .collect();
    println!("{label:>14}: {}", nodes.join(" "));
}

fn main() {
    let stack = WaitFreeStack::with_observer(StackConfig::new(1, 4), Log::default()).unwrap();
    for v in 1..=12u64 {
        stack.push(0, v);
    }
    show("after pushes", &stack.chain().unwrap());

    for _ in 0..9 {
        stack.pop(0);
    }
    show("after 9 pops", &stack.chain().unwrap());

    for line in stack.observer().0.lock().unwrap().iter() {
        println!("  {line}");
    }
    println!("(* = popped but still linked)");
}
