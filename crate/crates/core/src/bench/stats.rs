use serde::{Deserialize, Serialize};

use crate::error::ChainError;
use crate::observer::Observer;
use crate::stack::WaitFreeStack;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureStats {
    /// Hops from `top` to the sentinel.
    pub physical_len: u64,
    /// Pushes minus successful pops.
    pub logical_size: u64,
    /// `physical_len / max(logical_size, 1)`.
    pub ratio: f64,
    /// Chain nodes below the first range base, which are never unlinked.
    pub residue: u64,
    /// Largest cleanup counter seen on the chain.
    pub max_counter: usize,
    /// Ranges still on the chain although every node in them is claimed and
    /// their right node has been pushed. Zero once cleanup has caught up.
    pub dead_ranges: u64,
}

pub fn structure_stats<T, O>(
    stack: &WaitFreeStack<T, O>,
    logical_size: u64,
) -> Result<StructureStats, ChainError>
where
    T: Clone + Send + Sync + 'static,
    O: Observer,
{
    let w = stack.w();
    let chain = stack.chain()?;
    let physical_len = chain.len() as u64;
    let top = chain.first().map_or(0, |n| n.index);
    let mut dead_ranges = 0;
    let mut i = 0;
    while i < chain.len() {
        let base = chain[i].index / w * w;
        let mut j = i;
        while j < chain.len() && chain[j].index >= base {
            j += 1;
        }
        let range = &chain[i..j];
        if base > 0 && range.len() as u64 == w && top >= base + w && range.iter().all(|n| n.marked)
        {
            dead_ranges += 1;
        }
        i = j;
    }
    Ok(StructureStats {
        physical_len,
        logical_size,
        ratio: physical_len as f64 / logical_size.max(1) as f64,
        residue: chain.iter().filter(|n| n.index < w).count() as u64,
        max_counter: chain.iter().map(|n| n.counter).max().unwrap_or(0),
        dead_ranges,
    })
}

/// Quiescent bound on the chain length: logical size plus one partially
/// claimed range per thread plus the residue range.
pub fn structural_bound(logical_size: u64, w: u64, threads: usize) -> u64 {
    logical_size + w * threads as u64 + w
}
