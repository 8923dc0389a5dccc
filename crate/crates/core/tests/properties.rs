use std::collections::BTreeSet;

use assoclab_core::cache::{run_pair, RehashConfig, SetAssocCache};
use assoclab_core::policy::PolicyInstance;
use assoclab_core::{ItemId, Pager, PolicyKind, Trace};
use proptest::prelude::*;

const LAZY: [PolicyKind; 6] = [
    PolicyKind::Lru,
    PolicyKind::LruK(2),
    PolicyKind::Lfu,
    PolicyKind::Fifo,
    PolicyKind::Clock,
    PolicyKind::ReuseDistance,
];

const STACK: [PolicyKind; 4] = [PolicyKind::Lru, PolicyKind::LruK(2), PolicyKind::Lfu, PolicyKind::ReuseDistance];

const ALL: [PolicyKind; 7] = [
    PolicyKind::Lru,
    PolicyKind::LruK(2),
    PolicyKind::Lfu,
    PolicyKind::Fifo,
    PolicyKind::Clock,
    PolicyKind::FlushWhenFull,
    PolicyKind::ReuseDistance,
];

fn trace_strategy(universe: u64, max_len: usize) -> impl Strategy<Value = Trace> {
    prop::collection::vec(0..universe, 0..max_len).prop_map(Trace::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lazy_kinds_evict_one_only_when_full(
        kind in prop::sample::select(LAZY.to_vec()),
        cap in 1usize..6,
        trace in trace_strategy(10, 200),
    ) {
        let mut p = PolicyInstance::new(kind, cap).unwrap();
        for x in &trace {
            let full = p.len() == cap;
            let was = p.contains(x);
            let out = p.access(x);
            prop_assert_eq!(out.hit, was);
            if out.hit {
                prop_assert!(out.evicted.is_empty());
            } else {
                prop_assert_eq!(out.evicted.len(), usize::from(full));
            }
            prop_assert!(p.contains(x));
            prop_assert!(p.len() <= cap);
        }
    }

    #[test]
    fn stack_kinds_nest(
        kind in prop::sample::select(STACK.to_vec()),
        cap in 1usize..6,
        trace in trace_strategy(9, 200),
    ) {
        let mut small = PolicyInstance::new(kind, cap).unwrap();
        let mut large = PolicyInstance::new(kind, cap + 1).unwrap();
        for x in &trace {
            small.access(x);
            large.access(x);
            prop_assert!(small.contents().is_subset(&large.contents()));
        }
    }

    #[test]
    fn misses_touch_only_the_home_bucket(
        kind in prop::sample::select(ALL.to_vec()),
        (k, alpha) in (1usize..5, 1usize..5).prop_map(|(n, a)| (n * a, a)),
        seed in any::<u64>(),
        trace in trace_strategy(40, 300),
    ) {
        let mut c = SetAssocCache::new(k, alpha, kind, seed, RehashConfig::none()).unwrap();
        for x in &trace {
            let home = c.bucket_of(x);
            let before: Vec<BTreeSet<ItemId>> = (0..c.bucket_count()).map(|b| c.bucket(b).contents()).collect();
            let out = c.access(x);
            prop_assert!(out.flushed.is_empty());
            for e in &out.evicted {
                prop_assert_eq!(c.bucket_of(*e), home);
            }
            for (b, old) in before.iter().enumerate() {
                if b != home {
                    prop_assert_eq!(&c.bucket(b).contents(), old);
                }
                prop_assert!(c.bucket(b).len() <= alpha);
            }
        }
    }

    #[test]
    fn one_bucket_is_the_plain_policy(
        kind in prop::sample::select(ALL.to_vec()),
        k in 1usize..7,
        seed in any::<u64>(),
        trace in trace_strategy(12, 200),
    ) {
        let mut sa = SetAssocCache::new(k, k, kind, seed, RehashConfig::none()).unwrap();
        let mut fa = PolicyInstance::new(kind, k).unwrap();
        for x in &trace {
            prop_assert_eq!(sa.access(x), fa.access(x));
        }
    }

    #[test]
    fn direct_mapped_holds_one_per_bucket(
        kind in prop::sample::select(ALL.to_vec()),
        k in 1usize..9,
        seed in any::<u64>(),
        trace in trace_strategy(30, 200),
    ) {
        let mut c = SetAssocCache::new(k, 1, kind, seed, RehashConfig::none()).unwrap();
        for x in &trace {
            let resident = c.contains(x);
            let out = c.access(x);
            prop_assert_eq!(out.hit, resident);
            prop_assert_eq!(c.bucket(c.bucket_of(x)).contents(), BTreeSet::from([x]));
        }
    }

    #[test]
    fn ledger_holds_on_every_prefix(
        kind in prop::sample::select(ALL.to_vec()),
        (n, alpha) in (1usize..6, 1usize..6),
        gap in 0usize..3,
        mode in 0u8..3,
        threshold in 1u64..60,
        seed in any::<u64>(),
        trace in trace_strategy(40, 400),
    ) {
        let k = n * alpha;
        let rehash = match mode {
            0 => RehashConfig::none(),
            1 => RehashConfig::full_flush(threshold),
            _ => RehashConfig::incremental(threshold.max(k as u64)),
        };
        let sa = SetAssocCache::new(k, alpha, kind, seed, rehash).unwrap();
        let rep = run_pair(&trace, sa, kind, k.saturating_sub(gap).max(1)).unwrap();
        prop_assert_eq!(rep.ledger_violations, 0);
        prop_assert!(rep.slack() >= 0);
        prop_assert!(rep.bad_flush_evictions <= rep.flush_evictions);
    }
}
