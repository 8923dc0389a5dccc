//! Lockstep comparison of a set-associative cache against a fully
//! associative reference.
//!
//! An eviction by the test cache is *bad* when the evicted item is held by
//! the reference right after the same request. Every request that misses in
//! the test cache but hits in the reference can be charged to an earlier bad
//! eviction of the same item, so
//!
//! ```text
//! misses_test <= misses_ref + bad_evictions + bad_flush_evictions
//! ```
//!
//! holds on every prefix. The runner checks this after each request.

use serde::{Deserialize, Serialize};

use super::{CacheError, SetAssocCache};
use crate::policy::{ItemId, PolicyInstance, PolicyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStep {
    pub test_hit: bool,
    pub ref_hit: bool,
    pub bad_eviction: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRunReport {
    pub requests: u64,
    pub misses_test: u64,
    pub misses_ref: u64,
    /// Bad evictions made by the replacement policy.
    pub bad_evictions: u64,
    /// All evictions caused by rehashing.
    pub flush_evictions: u64,
    /// Rehash evictions of items the reference still held.
    pub bad_flush_evictions: u64,
    /// Prefixes on which the miss ledger failed; zero unless something is broken.
    pub ledger_violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<Vec<PairStep>>,
}

impl PairRunReport {
    /// Ledger slack `misses_ref + B + F_bad - misses_test`; never negative.
    pub fn slack(&self) -> i128 {
        self.misses_ref as i128 + self.bad_evictions as i128 + self.bad_flush_evictions as i128
            - self.misses_test as i128
    }
}

/// Streaming form of [`run_pair`].
#[derive(Clone, Debug)]
pub struct PairRunner {
    test: SetAssocCache,
    reference: PolicyInstance,
    report: PairRunReport,
}

impl PairRunner {
    pub fn new(test: SetAssocCache, ref_kind: PolicyKind, ref_capacity: usize) -> Result<Self, CacheError> {
        Ok(Self {
            test,
            reference: PolicyInstance::new(ref_kind, ref_capacity)?,
            report: PairRunReport::default(),
        })
    }

    /// Keep a per-request log in the report.
    pub fn with_log(mut self) -> Self {
        self.report.log = Some(Vec::new());
        self
    }

    pub fn step(&mut self, item: ItemId) {
        let t = self.test.access(item);
        let r = self.reference.access(item);
        let rep = &mut self.report;
        rep.requests += 1;
        rep.misses_test += u64::from(!t.hit);
        rep.misses_ref += u64::from(!r.hit);
        let mut bad = false;
        for &e in &t.evicted {
            if self.reference.contains(e) {
                rep.bad_evictions += 1;
                bad = true;
            }
        }
        for &e in &t.flushed {
            rep.flush_evictions += 1;
            if self.reference.contains(e) {
                rep.bad_flush_evictions += 1;
                bad = true;
            }
        }
        if rep.slack() < 0 {
            rep.ledger_violations += 1;
        }
        if let Some(log) = rep.log.as_mut() {
            log.push(PairStep {
                test_hit: t.hit,
                ref_hit: r.hit,
                bad_eviction: bad,
            });
        }
    }

    pub fn report(&self) -> &PairRunReport {
        &self.report
    }

    pub fn test_cache(&self) -> &SetAssocCache {
        &self.test
    }

    pub fn reference(&self) -> &PolicyInstance {
        &self.reference
    }

    pub fn into_report(self) -> PairRunReport {
        self.report
    }
}

/// Replays `trace` through `test` and a fully associative `ref_kind` cache of
/// `ref_capacity` slots in lockstep.
pub fn run_pair(
    trace: impl IntoIterator<Item = ItemId>,
    test: SetAssocCache,
    ref_kind: PolicyKind,
    ref_capacity: usize,
) -> Result<PairRunReport, CacheError> {
    let mut runner = PairRunner::new(test, ref_kind, ref_capacity)?;
    for x in trace {
        runner.step(x);
    }
    Ok(runner.into_report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::RehashConfig;
    use crate::trace::Trace;

    #[test]
    fn identical_machines_have_no_bad_evictions() {
        let t: Trace = (0..500u64).map(|i| ItemId((i * 7919) % 23)).collect();
        let test = SetAssocCache::new(6, 6, PolicyKind::Lru, 0, RehashConfig::none()).unwrap();
        let rep = run_pair(&t, test, PolicyKind::Lru, 6).unwrap();
        assert_eq!(rep.bad_evictions, 0);
        assert_eq!(rep.misses_test, rep.misses_ref);
    }

    #[test]
    fn log_records_every_request() {
        let t: Trace = vec![1u64, 2, 3, 1].into();
        let test = SetAssocCache::new(4, 1, PolicyKind::Lru, 0, RehashConfig::none()).unwrap();
        let mut runner = PairRunner::new(test, PolicyKind::Lru, 2).unwrap().with_log();
        for x in &t {
            runner.step(x);
        }
        let rep = runner.into_report();
        assert_eq!(rep.log.as_ref().unwrap().len(), 4);
        assert_eq!(rep.ledger_violations, 0);
    }

    #[test]
    fn flush_evictions_are_tallied_separately() {
        let t: Trace = (0..200u64).map(|i| ItemId(i % 5)).collect();
        let test = SetAssocCache::new(4, 2, PolicyKind::Lru, 1, RehashConfig::full_flush(3)).unwrap();
        let rep = run_pair(&t, test, PolicyKind::Lru, 3).unwrap();
        assert!(rep.flush_evictions > 0);
        assert!(rep.bad_flush_evictions <= rep.flush_evictions);
        assert_eq!(rep.ledger_violations, 0);
    }
}
