//! Offline optimal paging by furthest-in-future eviction.

use std::collections::{BTreeSet, HashMap};

use assoclab_core::{ItemId, Trace};

/// Position of the next request for the same item, `u64::MAX` if none.
fn next_uses(trace: &Trace) -> Vec<u64> {
    let mut next = vec![u64::MAX; trace.len()];
    let mut seen: HashMap<ItemId, u64> = HashMap::new();
    for (i, x) in trace.iter().enumerate().rev() {
        if let Some(&j) = seen.get(&x) {
            next[i] = j;
        }
        seen.insert(x, i as u64);
    }
    next
}

/// Misses of the offline optimum with `k` slots.
///
/// On a miss with a full cache the resident whose next request is furthest
/// away is evicted. Items never requested again go first, largest id first.
pub fn compute_opt_cost(trace: &Trace, k: usize) -> u64 {
    assert!(k > 0, "capacity must be positive");
    let next = next_uses(trace);
    // (next use, id) per resident; the maximum is the victim.
    let mut queue: BTreeSet<(u64, ItemId)> = BTreeSet::new();
    let mut resident: HashMap<ItemId, u64> = HashMap::new();
    let mut misses = 0;
    for (i, x) in trace.iter().enumerate() {
        match resident.get_mut(&x) {
            Some(n) => {
                queue.remove(&(*n, x));
                *n = next[i];
                queue.insert((next[i], x));
            }
            None => {
                misses += 1;
                if resident.len() == k {
                    let (_, victim) = queue.pop_last().expect("full cache");
                    resident.remove(&victim);
                }
                resident.insert(x, next[i]);
                queue.insert((next[i], x));
            }
        }
    }
    misses
}
