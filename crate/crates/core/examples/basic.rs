//! Single-threaded use of the wait-free stack.
//!
//! Each caller has a thread id in `0..threads`; the stack keeps one
//! announce slot per id.

use wfstack::WaitFreeStack;

fn main() {
    let stack = WaitFreeStack::new(1, 4).expect("valid config");
    for v in ["a", "b", "c"] {
        stack.push(0, v.to_string());
    }
    println!("top index after 3 pushes: {}", stack.top_index());
    println!(
        "live values, top first: {:?}",
        stack.unmarked_values().unwrap()
    );

    while let Some(v) = stack.pop(0) {
        println!("popped {v}");
    }
    assert_eq!(stack.pop(0), None);

    // Popped nodes stay on the chain until their range of W fills up.
    println!("physical nodes left: {}", stack.physical_len().unwrap());
}
