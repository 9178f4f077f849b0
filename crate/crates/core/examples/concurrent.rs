//! Several threads pushing and popping at once, then a conservation check.

use std::collections::HashSet;
use std::thread;

use wfstack::WaitFreeStack;

const THREADS: usize = 4;
const PER_THREAD: u64 = 50_000;

fn main() {
    let stack = WaitFreeStack::new(THREADS, 8).unwrap();
    let popped: Vec<Vec<u64>> = thread::scope(|s| {
        let handles: Vec<_> = (0..THREADS)
            .map(|tid| {
                let stack = &stack;
                s.spawn(move || {
                    let mut got = Vec::new();
                    for i in 0..PER_THREAD {
                        stack.push(tid, (tid as u64) << 32 | i);
                        if i % 2 == 1 {
                            got.extend(stack.pop(tid));
                        }
                    }
                    got
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut seen = HashSet::new();
    let mut count = 0;
    for v in popped.iter().flatten() {
        assert!(seen.insert(*v), "value {v:#x} popped twice");
        count += 1;
    }
    while let Some(v) = stack.pop(0) {
        assert!(seen.insert(v), "value {v:#x} popped twice");
        count += 1;
    }
    assert_eq!(count, THREADS as u64 * PER_THREAD);
    println!("{count} values pushed, each popped exactly once");
}
