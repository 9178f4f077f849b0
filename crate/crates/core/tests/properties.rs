use std::cell::RefCell;

use proptest::prelude::*;
use wfstack::bench::{run_windows, WindowConfig};
use wfstack::lincheck::{parse_histories, write_histories, HistoryMeta};
use wfstack::{
    CleanupMode, Lifo, LockedStack, SequentialStackModel, StackConfig, TreiberStack, WaitFreeStack,
};

/// `Some(v)` pushes `v`, `None` pops.
fn replay<S: Lifo<u64>>(stack: &S, ops: &[Option<u64>]) -> Vec<Option<u64>> {
    ops.iter()
        .filter_map(|op| match op {
            Some(v) => {
                stack.push(0, *v);
                None
            }
            None => Some(stack.pop(0)),
        })
        .collect()
}

fn ops() -> impl Strategy<Value = Vec<Option<u64>>> {
    proptest::collection::vec(proptest::option::weighted(0.55, any::<u64>()), 0..400)
}

proptest! {
    #[test]
    fn wait_free_matches_model(ops in ops(), w in 2u64..12) {
        let model = replay(&RefCell::new(SequentialStackModel::new()), &ops);
        let stack = WaitFreeStack::with_config(
            StackConfig::new(1, w).cleanup_mode(CleanupMode::Corrected),
        ).unwrap();
        prop_assert_eq!(replay(&stack, &ops), model);
    }

    #[test]
    fn baselines_match_model(ops in ops()) {
        let model = replay(&RefCell::new(SequentialStackModel::new()), &ops);
        prop_assert_eq!(&replay(&TreiberStack::new(), &ops), &model);
        prop_assert_eq!(&replay(&LockedStack::new(), &ops), &model);
    }

    #[test]
    fn chain_stays_ordered(ops in ops(), w in 2u64..6) {
        let stack = WaitFreeStack::new(1, w).unwrap();
        replay(&stack, &ops);
        let chain = stack.chain().unwrap();
        prop_assert!(chain.windows(2).all(|p| p[0].index > p[1].index));
        prop_assert!(chain.iter().all(|n| n.counter as u64 <= w + 1));
    }
}

#[test]
fn recorded_histories_round_trip() {
    let stack = WaitFreeStack::new(3, 2).unwrap();
    let meta = HistoryMeta {
        implementation: "wf".into(),
        w: Some(2),
        seed: Some(11),
    };
    let run = run_windows(&stack, 3, 0.5, 11, WindowConfig::new(12, 100), meta).unwrap();
    let text = write_histories(&run.histories);
    let back = parse_histories(&text).unwrap();
    assert_eq!(back, run.histories);
    assert_eq!(write_histories(&back), text);
}
