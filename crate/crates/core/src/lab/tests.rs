use std::collections::BTreeSet;

use super::*;
use crate::policy::{AccessOutcome, OrderFamilyKey, PolicyError};

const A: u64 = 0;
const B: u64 = 1;
const C: u64 = 2;
const Y: u64 = 3;
const Z: u64 = 4;

fn ids(xs: &[u64]) -> Trace {
    xs.iter().copied().map(ItemId).collect()
}

fn set(xs: &[u64]) -> BTreeSet<ItemId> {
    xs.iter().copied().map(ItemId).collect()
}

fn small() -> SearchSpace {
    SearchSpace::new(3, 6, [1, 2, 3])
}

/// LRU bookkeeping, but evicts the resident that LRU would keep longest.
#[derive(Clone)]
struct Inverted {
    inner: PolicyInstance,
}

impl Pager for Inverted {
    fn capacity(&self) -> usize {
        self.inner.capacity()
    }
    fn len(&self) -> usize {
        self.inner.len()
    }
    fn contains(&self, item: ItemId) -> bool {
        self.inner.contains(item)
    }
    fn access(&mut self, item: ItemId) -> AccessOutcome {
        if self.inner.contains(item) || !self.inner.is_full() {
            return self.inner.access(item);
        }
        let victim = self
            .inner
            .contents()
            .into_iter()
            .min_by_key(|&x| self.inner.eviction_rank_key(x).unwrap())
            .unwrap();
        self.inner.delete(victim);
        let mut out = self.inner.access(item);
        out.evicted = vec![victim];
        out
    }
    fn contents(&self) -> BTreeSet<ItemId> {
        self.inner.contents()
    }
    fn delete(&mut self, item: ItemId) -> bool {
        self.inner.delete(item)
    }
    fn rank_key(&self, item: ItemId) -> Result<OrderFamilyKey, PolicyError> {
        self.inner.eviction_rank_key(item)
    }
}

struct InvertedLru;

impl PagerFactory for InvertedLru {
    type P = Inverted;
    fn build(&self, capacity: usize) -> Inverted {
        Inverted {
            inner: PolicyInstance::new(PolicyKind::Lru, capacity).unwrap(),
        }
    }
    fn label(&self) -> String {
        "INVERTED-LRU".into()
    }
}

#[test]
fn budget_is_enforced() {
    let space = SearchSpace::new(10, 8, [2, 3]);
    assert!(matches!(
        check_lazy(&PolicyKind::Lru, &space),
        Err(LabError::BudgetExceeded { .. })
    ));
    let space = space.with_budget(u64::MAX);
    assert_eq!(space.size(), 100_000_000);
}

#[test]
fn sampled_subsets_include_universe() {
    let space = small().with_subsets(SubsetFamily::Sampled { count: 3, seed: 9 });
    let masks = space.subset_masks();
    assert!(masks.contains(&0b111));
    assert!(masks.len() <= 4);
    assert_eq!(small().subset_masks().len(), 7);
}

#[test]
fn lru_is_in_every_class() {
    let space = SearchSpace::new(4, 6, [1, 2, 3]);
    let a = audit(&PolicyKind::Lru, &space).unwrap();
    assert!(a.lazy.pass);
    assert!(a.is_conservative());
    assert!(a.stack.pass);
    assert!(a.stable.pass);
    assert!(a.belady.pass);
    assert!(a.conforms.as_ref().unwrap().pass);
    assert!(a.monotone.as_ref().unwrap().pass);
    assert!(a.self_similar.as_ref().unwrap().pass);
    assert!(a.hierarchy_violations().is_empty());
    assert_eq!(a.lazy.traces_checked, 4 + 16 + 64 + 256 + 1024 + 4096);
}

#[test]
fn flush_when_full_is_neither_lazy_nor_conservative() {
    let v = check_lazy(&PolicyKind::FlushWhenFull, &small()).unwrap();
    let w = v.witness.unwrap();
    // Two slots filled by A and B; C flushes both.
    assert_eq!(w.trace, ids(&[A, B, C]));
    assert_eq!(w.sizes, vec![2]);
    assert!(confirm_witness(Predicate::Lazy, &PolicyKind::FlushWhenFull, &w));

    let v = check_conservative(&PolicyKind::FlushWhenFull, &small(), 2).unwrap();
    let w = v.witness.unwrap();
    assert!(confirm_witness(Predicate::Conservative, &PolicyKind::FlushWhenFull, &w));
}

#[test]
fn fifo_and_clock_are_not_stack() {
    let space = SearchSpace::new(4, 8, [1, 2, 3]);
    for kind in [PolicyKind::Fifo, PolicyKind::Clock] {
        let v = check_stack(&kind, &space).unwrap();
        assert!(!v.pass, "{kind}");
        let w = v.witness.unwrap();
        assert!(confirm_witness(Predicate::Stack, &kind, &w));
        let v = check_stable(&kind, &space).unwrap();
        assert!(!v.pass, "{kind}");
        assert!(confirm_witness(Predicate::Stable, &kind, v.witness.as_ref().unwrap()));
    }
}

#[test]
fn witnesses_are_minimal() {
    let space = SearchSpace::new(4, 8, [1, 2, 3]);
    let v = check_stack(&PolicyKind::Fifo, &space).unwrap();
    let len = v.witness.unwrap().trace.len();
    let shorter = SearchSpace::new(4, len - 1, [1, 2, 3]);
    assert!(check_stack(&PolicyKind::Fifo, &shorter).unwrap().pass);
}

#[test]
fn fifo_anomaly_needs_a_long_trace() {
    // The shortest FIFO anomaly between 3 and 4 frames is longer than this
    // space reaches; the search must come back clean, not with a bogus witness.
    let space = SearchSpace::new(4, 10, [3, 4]);
    assert!(find_belady_anomaly(&PolicyKind::Fifo, &space).unwrap().pass);
}

#[test]
fn known_fifo_anomaly_confirms() {
    let w = Witness {
        trace: ids(&[0, 1, 2, 3, 0, 1, 4, 0, 1, 2, 3, 4]),
        subset: None,
        item: None,
        sizes: vec![4, 3],
        window: None,
        violating: BTreeSet::new(),
    };
    assert!(confirm_witness(Predicate::BeladyAnomalyFree, &PolicyKind::Fifo, &w));
    assert!(!confirm_witness(Predicate::BeladyAnomalyFree, &PolicyKind::Lru, &w));
}

#[test]
fn reuse_distance_counterexample_replays() {
    let sigma = ids(&[A, Y, Z, Z, Z, Z, A, B, Y, Y, B, C]);
    let x = set(&[A, B, C, Y]);
    let inst = evaluate_stable(&PolicyKind::ReuseDistance, &sigma, &x, 4, 3);
    assert_eq!(inst.small_out, vec![ItemId(B)]);
    assert_eq!(inst.large_out, vec![ItemId(A)]);
    assert!(inst.antecedent);
    assert!(inst.violated);
    assert_eq!(inst.small_after, set(&[A, C, Y]));

    let w = Witness {
        trace: sigma,
        subset: Some(x),
        item: Some(ItemId(C)),
        sizes: vec![4, 3],
        window: None,
        violating: set(&[A]),
    };
    assert!(confirm_witness(Predicate::Stable, &PolicyKind::ReuseDistance, &w));
    assert!(!confirm_witness(Predicate::Stable, &PolicyKind::Lru, &w));
}

#[test]
fn reuse_distance_family_is_not_self_similar() {
    let space = SearchSpace::new(4, 7, [1, 2, 3]);
    let v = check_family_self_similar(&PolicyKind::ReuseDistance, &space).unwrap();
    assert!(!v.pass);
    assert!(confirm_witness(
        Predicate::SelfSimilarFamily,
        &PolicyKind::ReuseDistance,
        v.witness.as_ref().unwrap()
    ));
    assert!(check_conforms(&PolicyKind::ReuseDistance, &space).unwrap().pass);
    assert!(check_stack(&PolicyKind::ReuseDistance, &space).unwrap().pass);
}

#[test]
fn stable_families_pass() {
    let space = SearchSpace::new(4, 6, [1, 2, 3]);
    for kind in [PolicyKind::Lfu, PolicyKind::LruK(2)] {
        for v in [
            check_stable(&kind, &space).unwrap(),
            check_conforms(&kind, &space).unwrap(),
            check_family_monotone(&kind, &space).unwrap(),
            check_family_self_similar(&kind, &space).unwrap(),
        ] {
            assert!(v.pass, "{kind} {}: {:?}", v.predicate, v.witness);
        }
    }
}

#[test]
fn order_checks_reject_kinds_without_family() {
    for kind in [PolicyKind::Fifo, PolicyKind::Clock, PolicyKind::FlushWhenFull] {
        assert!(matches!(check_conforms(&kind, &small()), Err(LabError::Unsupported(_))));
        let a = audit(&kind, &small()).unwrap();
        assert!(a.conforms.is_none() && a.monotone.is_none());
    }
}

#[test]
fn inverted_policy_fails_conformance() {
    let v = check_conforms(&InvertedLru, &small()).unwrap();
    assert!(!v.pass);
    let w = v.witness.unwrap();
    assert_eq!(w.trace, ids(&[A, B, C]));
    assert!(confirm_witness(Predicate::Conforms, &InvertedLru, &w));
    assert!(!confirm_witness(Predicate::Conforms, &PolicyKind::Lru, &w));
}

#[test]
fn confirm_rejects_malformed_witnesses() {
    let w = Witness {
        trace: Trace::new(),
        subset: None,
        item: None,
        sizes: vec![],
        window: None,
        violating: BTreeSet::new(),
    };
    assert!(!confirm_witness(Predicate::Lazy, &PolicyKind::Lru, &w));
    let w = Witness {
        trace: ids(&[A, B]),
        ..w
    };
    assert!(!confirm_witness(Predicate::Stack, &PolicyKind::Lru, &w));
}

#[test]
fn verdict_serializes() {
    let v = check_stack(&PolicyKind::Fifo, &SearchSpace::new(3, 6, [1, 2, 3])).unwrap();
    let json = serde_json::to_string(&v).unwrap();
    assert!(json.contains("\"STACK\""));
    let back: ClassVerdict = serde_json::from_str(&json).unwrap();
    assert_eq!(back, v);
}
