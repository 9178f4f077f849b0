//! The same workload over every stack through the `Lifo` trait.

use std::cell::RefCell;

use wfstack::{Lifo, LockedStack, SequentialStackModel, TreiberStack, WaitFreeStack};

fn workload(stack: &dyn Lifo<u64>) -> Vec<Option<u64>> {
    let mut out = Vec::new();
    for i in 0..20 {
        stack.push(0, i);
        if i % 3 == 2 {
            out.push(stack.pop(0));
        }
    }
    out.extend((0..4).map(|_| stack.pop(0)));
    out
}

fn main() {
    let model = RefCell::new(SequentialStackModel::new());
    let expected = workload(&model);
    let wf = WaitFreeStack::new(1, 4).unwrap();
    let treiber = TreiberStack::new();
    let locked = LockedStack::new();
    let stacks: [&dyn Lifo<u64>; 3] = [&wf, &treiber, &locked];
    for s in stacks {
        let got = workload(s);
        println!(
            "{:>16}: {}",
            s.name(),
            if got == expected {
                "matches model"
            } else {
                "MISMATCH"
            }
        );
        assert_eq!(got, expected);
    }
}
