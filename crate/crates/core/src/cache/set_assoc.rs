use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CacheError, HashIndexer, SeedStream};
use crate::policy::{AccessOutcome, ItemId, OrderFamilyKey, Pager, PolicyError, PolicyInstance, PolicyKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum RehashMode {
    None,
    FullFlush,
    Incremental,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RehashConfig {
    pub mode: RehashMode,
    /// Demand misses between rehashes.
    pub threshold: u64,
}

impl RehashConfig {
    pub fn none() -> Self {
        Self {
            mode: RehashMode::None,
            threshold: u64::MAX,
        }
    }

    pub fn full_flush(threshold: u64) -> Self {
        Self {
            mode: RehashMode::FullFlush,
            threshold,
        }
    }

    pub fn incremental(threshold: u64) -> Self {
        Self {
            mode: RehashMode::Incremental,
            threshold,
        }
    }

    /// Threshold `ceil(k^d)`, the rehash period for exponent `d`.
    pub fn power_threshold(k: usize, d: f64) -> u64 {
        let t = (k as f64).powf(d).ceil();
        if t >= u64::MAX as f64 {
            u64::MAX
        } else {
            t as u64
        }
    }

    /// `k^2`, the default period.
    pub fn default_threshold(k: usize) -> u64 {
        (k as u64).saturating_mul(k as u64)
    }

    fn validate(&self, k: usize) -> Result<(), CacheError> {
        if self.mode == RehashMode::None {
            return Ok(());
        }
        if self.threshold == 0 {
            return Err(CacheError::BadThreshold {
                threshold: 0,
                k,
                reason: "must be positive",
            });
        }
        if self.mode == RehashMode::Incremental && self.threshold < k as u64 {
            return Err(CacheError::BadThreshold {
                threshold: self.threshold,
                k,
                reason: "incremental rehashing needs threshold >= k to finish before the next rehash",
            });
        }
        Ok(())
    }
}

/// α-way set-associative cache over `k` slots.
///
/// Buckets are physical: while an incremental rehash is in progress, a bucket
/// holds both items placed by the retiring indexer (still pending remap) and
/// items placed by the active one, under a single policy instance.
#[derive(Clone, Debug)]
pub struct SetAssocCache {
    k: usize,
    alpha: usize,
    kind: PolicyKind,
    buckets: Vec<PolicyInstance>,
    active: HashIndexer,
    retiring: Option<HashIndexer>,
    pending: BTreeSet<ItemId>,
    miss_counter: u64,
    rehash: RehashConfig,
    seeds: SeedStream,
    rehashes: u64,
}

impl SetAssocCache {
    pub fn new(k: usize, alpha: usize, kind: PolicyKind, seed: u64, rehash: RehashConfig) -> Result<Self, CacheError> {
        if k == 0 || alpha == 0 {
            return Err(CacheError::Zero { k, alpha });
        }
        if k % alpha != 0 {
            return Err(CacheError::NotDivisible { k, alpha });
        }
        rehash.validate(k)?;
        let n = k / alpha;
        let mut seeds = SeedStream::new(seed);
        let active = HashIndexer::new(seeds.next_seed(), n);
        Ok(Self {
            k,
            alpha,
            kind,
            buckets: Self::fresh_buckets(kind, alpha, n)?,
            active,
            retiring: None,
            pending: BTreeSet::new(),
            miss_counter: 0,
            rehash,
            seeds,
            rehashes: 0,
        })
    }

    fn fresh_buckets(kind: PolicyKind, alpha: usize, n: usize) -> Result<Vec<PolicyInstance>, PolicyError> {
        (0..n).map(|_| PolicyInstance::new(kind, alpha)).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket(&self, b: usize) -> &PolicyInstance {
        &self.buckets[b]
    }

    pub fn rehash_config(&self) -> RehashConfig {
        self.rehash
    }

    pub fn active_indexer(&self) -> &HashIndexer {
        &self.active
    }

    pub fn retiring_indexer(&self) -> Option<&HashIndexer> {
        self.retiring.as_ref()
    }

    /// Items still placed by the retiring indexer.
    pub fn pending_remap(&self) -> &BTreeSet<ItemId> {
        &self.pending
    }

    pub fn miss_counter(&self) -> u64 {
        self.miss_counter
    }

    /// Rehashes started so far.
    pub fn rehashes(&self) -> u64 {
        self.rehashes
    }

    /// Bucket currently holding (or that would hold) `item`.
    pub fn bucket_of(&self, item: ItemId) -> usize {
        match &self.retiring {
            Some(old) if self.pending.contains(&item) => old.bucket(item),
            _ => self.active.bucket(item),
        }
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.buckets[self.bucket_of(item)].contains(item)
    }

    pub fn len(&self) -> usize {
        self.buckets.iter().map(PolicyInstance::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contents(&self) -> BTreeSet<ItemId> {
        self.buckets.iter().flat_map(|b| b.contents()).collect()
    }

    /// Serves one request.
    pub fn access(&mut self, item: ItemId) -> AccessOutcome {
        if self.rehash.mode == RehashMode::Incremental && self.pending.contains(&item) {
            return self.migrate(item);
        }
        let b = self.active.bucket(item);
        if self.buckets[b].contains(item) {
            return self.buckets[b].access(item);
        }
        self.miss_counter += 1;
        let mut flushed = Vec::new();
        if self.miss_counter >= self.rehash.threshold {
            self.miss_counter = 0;
            match self.rehash.mode {
                RehashMode::FullFlush => flushed = self.flush().into_iter().collect(),
                RehashMode::Incremental => {
                    while let Some(x) = self.incremental_evict_step() {
                        flushed.push(x);
                    }
                    self.start_incremental();
                }
                RehashMode::None => {}
            }
        }
        let b = self.active.bucket(item);
        let mut out = self.buckets[b].access(item);
        if self.retiring.is_some() {
            for e in &out.evicted {
                self.pending.remove(e);
            }
            let budget = self.rehash.threshold - self.miss_counter;
            if let Some(x) = self.incremental_evict_step() {
                flushed.push(x);
            }
            while self.pending.len() as u64 > budget {
                flushed.extend(self.incremental_evict_step());
            }
            self.finish_if_drained();
        }
        out.flushed = flushed;
        out
    }

    /// A hit on an item still placed by the retiring indexer: move it to its
    /// new bucket, evicting there if that bucket is full.
    fn migrate(&mut self, item: ItemId) -> AccessOutcome {
        let old = self.retiring.expect("pending items imply a retiring indexer").bucket(item);
        self.buckets[old].delete(item);
        self.pending.remove(&item);
        let new = self.active.bucket(item);
        let moved = self.buckets[new].access(item);
        for e in &moved.evicted {
            self.pending.remove(e);
        }
        self.finish_if_drained();
        AccessOutcome {
            hit: true,
            evicted: moved.evicted,
            flushed: Vec::new(),
        }
    }

    fn flush(&mut self) -> BTreeSet<ItemId> {
        let flushed = self.contents();
        let n = self.buckets.len();
        self.buckets = Self::fresh_buckets(self.kind, self.alpha, n).expect("validated at construction");
        self.active = HashIndexer::new(self.seeds.next_seed(), n);
        self.rehashes += 1;
        flushed
    }

    /// Evicts everything and draws a new indexer. Bucket histories are reset.
    pub fn trigger_full_flush(&mut self) -> Result<BTreeSet<ItemId>, CacheError> {
        if self.rehash.mode != RehashMode::FullFlush {
            return Err(CacheError::WrongMode {
                expected: RehashMode::FullFlush,
                actual: self.rehash.mode,
            });
        }
        Ok(self.flush())
    }

    fn start_incremental(&mut self) {
        let n = self.buckets.len();
        let old = std::mem::replace(&mut self.active, HashIndexer::new(self.seeds.next_seed(), n));
        self.retiring = Some(old);
        self.pending = self.contents();
        self.rehashes += 1;
        self.finish_if_drained();
    }

    /// Draws a new indexer; every current resident becomes pending remap.
    pub fn begin_incremental_rehash(&mut self) -> Result<(), CacheError> {
        if self.rehash.mode != RehashMode::Incremental {
            return Err(CacheError::WrongMode {
                expected: RehashMode::Incremental,
                actual: self.rehash.mode,
            });
        }
        if self.retiring.is_some() {
            return Err(CacheError::RehashInProgress);
        }
        self.start_incremental();
        Ok(())
    }

    /// Evicts the smallest pending item from its old bucket, if any.
    pub fn incremental_evict_step(&mut self) -> Option<ItemId> {
        let old = self.retiring?;
        let x = self.pending.pop_first()?;
        let removed = self.buckets[old.bucket(x)].delete(x);
        debug_assert!(removed, "pending item {x} missing from its old bucket");
        self.finish_if_drained();
        Some(x)
    }

    fn finish_if_drained(&mut self) {
        if self.pending.is_empty() {
            self.retiring = None;
        }
    }

    pub fn delete(&mut self, item: ItemId) -> bool {
        let b = self.bucket_of(item);
        let removed = self.buckets[b].delete(item);
        if removed {
            self.pending.remove(&item);
            self.finish_if_drained();
        }
        removed
    }
}

impl Pager for SetAssocCache {
    fn capacity(&self) -> usize {
        self.k
    }
    fn len(&self) -> usize {
        SetAssocCache::len(self)
    }
    fn contains(&self, item: ItemId) -> bool {
        SetAssocCache::contains(self, item)
    }
    fn access(&mut self, item: ItemId) -> AccessOutcome {
        SetAssocCache::access(self, item)
    }
    fn contents(&self) -> BTreeSet<ItemId> {
        SetAssocCache::contents(self)
    }
    fn delete(&mut self, item: ItemId) -> bool {
        SetAssocCache::delete(self, item)
    }
    fn rank_key(&self, _item: ItemId) -> Result<OrderFamilyKey, PolicyError> {
        Err(PolicyError::UnsupportedKind(self.kind))
    }
}
