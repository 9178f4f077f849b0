//! Quiescent invariant audits. Each returns an [`Audit`] instead of failing
//! fast so a report lists every broken property at once.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::stats::structural_bound;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Audit {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Audit {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Audit {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// No value is popped twice and every popped value was pushed.
pub fn uniqueness(pushed: &HashSet<u64>, popped: &[u64]) -> Audit {
    let mut seen = HashSet::with_capacity(popped.len());
    let mut dup = None;
    let mut foreign = None;
    for &v in popped {
        if !seen.insert(v) {
            dup.get_or_insert(v);
        }
        if !pushed.contains(&v) {
            foreign.get_or_insert(v);
        }
    }
    let detail = match (dup, foreign) {
        (None, None) => format!("{} pops, all distinct", popped.len()),
        (d, f) => format!("duplicate pop: {d:?}, never pushed: {f:?}"),
    };
    Audit::new("uniqueness", dup.is_none() && foreign.is_none(), detail)
}

/// Popped and remaining values partition the pushed values.
pub fn conservation(pushed: &HashSet<u64>, popped: &[u64], remaining: &[u64]) -> Audit {
    let mut all: HashSet<u64> = HashSet::with_capacity(pushed.len());
    let mut overlap = 0usize;
    for &v in popped.iter().chain(remaining) {
        if !all.insert(v) {
            overlap += 1;
        }
    }
    let missing = pushed.difference(&all).count();
    let extra = all.difference(pushed).count();
    let passed = overlap == 0 && missing == 0 && extra == 0;
    Audit::new(
        "conservation",
        passed,
        format!(
            "pushed {}, popped {}, remaining {}, lost {missing}, extra {extra}, doubled {overlap}",
            pushed.len(),
            popped.len(),
            remaining.len()
        ),
    )
}

pub fn acyclic(result: Result<u64, String>) -> Audit {
    match result {
        Ok(len) => Audit::new("acyclic", true, format!("chain of {len} nodes")),
        Err(e) => Audit::new("acyclic", false, e),
    }
}

/// Draining the stack returns the unmarked chain nodes in chain order.
pub fn drain_matches_chain(chain: &[u64], drained: &[u64]) -> Audit {
    Audit::new(
        "drain-order",
        chain == drained,
        format!(
            "{} unmarked on chain, {} drained",
            chain.len(),
            drained.len()
        ),
    )
}

pub fn counter_limit(max_seen: usize, w: u64) -> Audit {
    Audit::new(
        "counter-limit",
        max_seen as u64 <= w + 1,
        format!("max counter {max_seen}, limit {}", w + 1),
    )
}

/// `clean` ran exactly once for each base whose counter reached W + 1.
pub fn single_clean(full_bases: &[u64], cleans: &[u64]) -> Audit {
    let mut seen = HashSet::new();
    let repeated: Vec<u64> = cleans
        .iter()
        .copied()
        .filter(|b| !seen.insert(*b))
        .collect();
    let full: HashSet<u64> = full_bases.iter().copied().collect();
    let full_dups = full_bases.len() - full.len();
    let passed = repeated.is_empty() && full_dups == 0 && full == seen;
    Audit::new(
        "single-clean",
        passed,
        format!(
            "{} bases full, {} cleans, repeated {:?}",
            full.len(),
            cleans.len(),
            &repeated[..repeated.len().min(8)]
        ),
    )
}

/// Unlinked index segments `[base, base + W - 1]` are pairwise disjoint and
/// each belongs to a cleaned base.
pub fn disjoint_unlinks(unlinks: &[(u64, u64)], cleans: &[u64], w: u64) -> Audit {
    let mut bases: Vec<u64> = unlinks.iter().map(|&(b, _)| b).collect();
    bases.sort_unstable();
    let overlapping = bases.windows(2).filter(|p| p[1] < p[0] + w).count();
    let cleaned: HashSet<u64> = cleans.iter().copied().collect();
    let orphan = bases.iter().filter(|b| !cleaned.contains(b)).count();
    let misaligned = bases.iter().filter(|&&b| b % w != 0).count();
    Audit::new(
        "disjoint-unlinks",
        overlapping == 0 && orphan == 0 && misaligned == 0,
        format!(
            "{} unlinks, {overlapping} overlapping, {orphan} without a clean, {misaligned} misaligned",
            bases.len()
        ),
    )
}

pub fn structure_bound(physical: u64, logical: u64, w: u64, threads: usize) -> Audit {
    let bound = structural_bound(logical, w, threads);
    Audit::new(
        "structural-bound",
        physical <= bound,
        format!("physical {physical}, logical {logical}, bound {bound}"),
    )
}

pub fn progress(stalls: usize, cap_secs: f64) -> Audit {
    Audit::new(
        "progress",
        stalls == 0,
        format!("{stalls} operations exceeded {cap_secs} s"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audits_flag_violations() {
        let pushed: HashSet<u64> = [1, 2, 3].into();
        assert!(uniqueness(&pushed, &[1, 2]).passed);
        assert!(!uniqueness(&pushed, &[1, 1]).passed);
        assert!(!uniqueness(&pushed, &[4]).passed);
        assert!(conservation(&pushed, &[1], &[3, 2]).passed);
        assert!(!conservation(&pushed, &[1], &[3]).passed);
        assert!(!conservation(&pushed, &[1, 2], &[3, 2]).passed);
        assert!(single_clean(&[4, 8], &[8, 4]).passed);
        assert!(!single_clean(&[4], &[4, 4]).passed);
        assert!(!single_clean(&[4, 8], &[4]).passed);
        assert!(disjoint_unlinks(&[(4, 8), (8, 12)], &[4, 8], 4).passed);
        assert!(!disjoint_unlinks(&[(4, 8), (4, 12)], &[4], 4).passed);
        assert!(!disjoint_unlinks(&[(4, 8)], &[], 4).passed);
        assert!(structure_bound(16, 4, 4, 2).passed);
        assert!(!structure_bound(17, 4, 4, 2).passed);
    }
}
