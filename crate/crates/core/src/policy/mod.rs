//! Single-cache eviction policies.
//!
//! Every policy runs on a fixed capacity and a per-instance logical clock
//! that advances by one on every request, hit or miss. Stack policies (LRU,
//! LRU-K, LFU, reuse distance) keep a per-item history that outlives
//! residency, so their eviction order is a function of the full request
//! sequence seen by the instance.

mod order;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::trace::Trace;

pub use order::{OrderFamilyKey, Phi, Polarity};

/// Opaque item identifier; the id order is the tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u64);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for ItemId {
    fn from(v: u64) -> Self {
        ItemId(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("capacity must be at least 1")]
    ZeroCapacity,
    #[error("LRU-K requires K >= 1")]
    ZeroK,
    #[error("unsupported kind: {0} has no order family")]
    UnsupportedKind(PolicyKind),
    #[error("unknown policy kind `{0}`")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Lru,
    LruK(u32),
    Lfu,
    Fifo,
    Clock,
    FlushWhenFull,
    ReuseDistance,
}

impl PolicyKind {
    /// Kinds whose evictions follow an order family and expose
    /// [`PolicyInstance::eviction_rank_key`].
    pub fn has_order_family(self) -> bool {
        matches!(
            self,
            PolicyKind::Lru | PolicyKind::LruK(_) | PolicyKind::Lfu | PolicyKind::ReuseDistance
        )
    }

    /// Number of most recent access timestamps retained per item.
    fn history_depth(self) -> usize {
        match self {
            PolicyKind::Lru => 1,
            PolicyKind::LruK(k) => k as usize,
            PolicyKind::ReuseDistance => 2,
            _ => 0,
        }
    }

    fn polarity(self) -> Polarity {
        match self {
            PolicyKind::Lfu => Polarity::LargerPhiEarlier,
            _ => Polarity::LargerPhiLater,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Lru => f.write_str("LRU"),
            PolicyKind::LruK(k) => write!(f, "LRU-{k}"),
            PolicyKind::Lfu => f.write_str("LFU"),
            PolicyKind::Fifo => f.write_str("FIFO"),
            PolicyKind::Clock => f.write_str("CLOCK"),
            PolicyKind::FlushWhenFull => f.write_str("FLUSH-WHEN-FULL"),
            PolicyKind::ReuseDistance => f.write_str("REUSE-DISTANCE"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase();
        let kind = match up.as_str() {
            "LRU" => PolicyKind::Lru,
            "LFU" => PolicyKind::Lfu,
            "FIFO" => PolicyKind::Fifo,
            "CLOCK" => PolicyKind::Clock,
            "FLUSH-WHEN-FULL" | "FWF" => PolicyKind::FlushWhenFull,
            "REUSE-DISTANCE" | "RD" => PolicyKind::ReuseDistance,
            other => match other.strip_prefix("LRU-") {
                Some(k) => {
                    let k: u32 = k.parse().map_err(|_| PolicyError::Parse(s.to_string()))?;
                    if k == 0 {
                        return Err(PolicyError::ZeroK);
                    }
                    PolicyKind::LruK(k)
                }
                None => return Err(PolicyError::Parse(s.to_string())),
            },
        };
        Ok(kind)
    }
}

impl Serialize for PolicyKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PolicyKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Result of serving one request.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessOutcome {
    pub hit: bool,
    /// Items evicted by the replacement policy.
    pub evicted: Vec<ItemId>,
    /// Items evicted by rehashing rather than by the policy. Always empty for
    /// a single policy instance.
    pub flushed: Vec<ItemId>,
}

impl AccessOutcome {
    fn hit() -> Self {
        Self {
            hit: true,
            ..Self::default()
        }
    }

    fn miss(evicted: Vec<ItemId>) -> Self {
        Self {
            hit: false,
            evicted,
            flushed: Vec::new(),
        }
    }

    /// Policy and rehash evictions together.
    pub fn all_evicted(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.evicted.iter().chain(self.flushed.iter()).copied()
    }
}

/// A fixed-capacity paging algorithm driven one request at a time.
pub trait Pager {
    fn capacity(&self) -> usize;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn contains(&self, item: ItemId) -> bool;
    fn access(&mut self, item: ItemId) -> AccessOutcome;
    /// Resident items, ascending.
    fn contents(&self) -> BTreeSet<ItemId>;
    /// Drops residency of `item`; returns whether it was resident.
    fn delete(&mut self, item: ItemId) -> bool;
    /// Position of `item` in the order the policy evicts by.
    fn rank_key(&self, item: ItemId) -> Result<OrderFamilyKey, PolicyError>;
}

#[derive(Clone, Debug, Default)]
struct History {
    /// Most recent timestamps, newest at the back.
    recent: VecDeque<u64>,
    count: u64,
}

/// Sort key whose maximum is the next victim: (tier, primary, id).
/// Tier 0 is finite phi, tier 1 infinite phi.
type Rank = (u8, u64, ItemId);

#[derive(Clone, Debug)]
enum Store {
    Ranked {
        rank_of: HashMap<ItemId, Rank>,
        queue: BTreeSet<Rank>,
    },
    Fifo {
        members: HashSet<ItemId>,
        queue: VecDeque<ItemId>,
    },
    Clock {
        slot_of: HashMap<ItemId, usize>,
        frames: Vec<Option<ItemId>>,
        referenced: Vec<bool>,
        hand: usize,
    },
    Flush {
        members: BTreeSet<ItemId>,
    },
}

/// One eviction policy over one fixed-capacity cache.
#[derive(Clone, Debug)]
pub struct PolicyInstance {
    kind: PolicyKind,
    capacity: usize,
    clock: u64,
    history: HashMap<ItemId, History>,
    store: Store,
}

impl PolicyInstance {
    pub fn new(kind: PolicyKind, capacity: usize) -> Result<Self, PolicyError> {
        if capacity == 0 {
            return Err(PolicyError::ZeroCapacity);
        }
        if kind == PolicyKind::LruK(0) {
            return Err(PolicyError::ZeroK);
        }
        let store = match kind {
            PolicyKind::Fifo => Store::Fifo {
                members: HashSet::new(),
                queue: VecDeque::new(),
            },
            PolicyKind::Clock => Store::Clock {
                slot_of: HashMap::new(),
                frames: vec![None; capacity],
                referenced: vec![false; capacity],
                hand: 0,
            },
            PolicyKind::FlushWhenFull => Store::Flush {
                members: BTreeSet::new(),
            },
            _ => Store::Ranked {
                rank_of: HashMap::new(),
                queue: BTreeSet::new(),
            },
        };
        Ok(Self {
            kind,
            capacity,
            clock: 0,
            history: HashMap::new(),
            store,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Number of requests served so far.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    fn record(&mut self, item: ItemId) -> Option<&History> {
        let depth = self.kind.history_depth();
        if !self.kind.has_order_family() {
            return None;
        }
        let now = self.clock;
        let h = self.history.entry(item).or_default();
        h.count += 1;
        if depth > 0 {
            if h.recent.len() == depth {
                h.recent.pop_front();
            }
            h.recent.push_back(now);
        }
        Some(h)
    }

    fn static_rank(kind: PolicyKind, item: ItemId, h: &History) -> Rank {
        let n = h.recent.len();
        match kind {
            PolicyKind::Lru | PolicyKind::LruK(_) => {
                let k = kind.history_depth();
                if n >= k {
                    // Older K-th access means larger phi.
                    (0, u64::MAX - h.recent[n - k], item)
                } else {
                    (1, 0, item)
                }
            }
            PolicyKind::Lfu => (0, u64::MAX - h.count, item),
            PolicyKind::ReuseDistance => {
                if n >= 2 {
                    (0, h.recent[n - 1] - h.recent[n - 2] - 1, item)
                } else {
                    (1, 0, item)
                }
            }
            _ => unreachable!("static rank requested for {kind}"),
        }
    }

    /// Serves one request.
    pub fn access(&mut self, item: ItemId) -> AccessOutcome {
        self.clock += 1;
        let kind = self.kind;
        let capacity = self.capacity;
        let rank = self.record(item).map(|h| Self::static_rank(kind, item, h));
        match &mut self.store {
            Store::Ranked { rank_of, queue } => {
                let rank = rank.expect("ranked kinds keep history");
                if let Some(old) = rank_of.insert(item, rank) {
                    queue.remove(&old);
                    queue.insert(rank);
                    return AccessOutcome::hit();
                }
                let mut evicted = Vec::new();
                if queue.len() == capacity {
                    let victim = queue.pop_last().expect("full cache is nonempty");
                    rank_of.remove(&victim.2);
                    evicted.push(victim.2);
                }
                queue.insert(rank);
                AccessOutcome::miss(evicted)
            }
            Store::Fifo { members, queue } => {
                if members.contains(&item) {
                    return AccessOutcome::hit();
                }
                let mut evicted = Vec::new();
                if queue.len() == capacity {
                    let victim = queue.pop_front().expect("full cache is nonempty");
                    members.remove(&victim);
                    evicted.push(victim);
                }
                members.insert(item);
                queue.push_back(item);
                AccessOutcome::miss(evicted)
            }
            Store::Clock {
                slot_of,
                frames,
                referenced,
                hand,
            } => {
                if let Some(&slot) = slot_of.get(&item) {
                    referenced[slot] = true;
                    return AccessOutcome::hit();
                }
                if slot_of.len() < capacity {
                    let slot = frames.iter().position(Option::is_none).expect("free frame");
                    frames[slot] = Some(item);
                    referenced[slot] = true;
                    slot_of.insert(item, slot);
                    return AccessOutcome::miss(Vec::new());
                }
                loop {
                    if referenced[*hand] {
                        referenced[*hand] = false;
                        *hand = (*hand + 1) % capacity;
                        continue;
                    }
                    let victim = frames[*hand].replace(item).expect("full cache has no holes");
                    referenced[*hand] = true;
                    slot_of.remove(&victim);
                    slot_of.insert(item, *hand);
                    *hand = (*hand + 1) % capacity;
                    return AccessOutcome::miss(vec![victim]);
                }
            }
            Store::Flush { members } => {
                if members.contains(&item) {
                    return AccessOutcome::hit();
                }
                let evicted = if members.len() == capacity {
                    std::mem::take(members).into_iter().collect()
                } else {
                    Vec::new()
                };
                members.insert(item);
                AccessOutcome::miss(evicted)
            }
        }
    }

    pub fn contains(&self, item: ItemId) -> bool {
        match &self.store {
            Store::Ranked { rank_of, .. } => rank_of.contains_key(&item),
            Store::Fifo { members, .. } => members.contains(&item),
            Store::Clock { slot_of, .. } => slot_of.contains_key(&item),
            Store::Flush { members } => members.contains(&item),
        }
    }

    pub fn len(&self) -> usize {
        match &self.store {
            Store::Ranked { rank_of, .. } => rank_of.len(),
            Store::Fifo { members, .. } => members.len(),
            Store::Clock { slot_of, .. } => slot_of.len(),
            Store::Flush { members } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Resident items, ascending.
    pub fn contents(&self) -> BTreeSet<ItemId> {
        match &self.store {
            Store::Ranked { rank_of, .. } => rank_of.keys().copied().collect(),
            Store::Fifo { members, .. } => members.iter().copied().collect(),
            Store::Clock { slot_of, .. } => slot_of.keys().copied().collect(),
            Store::Flush { members } => members.clone(),
        }
    }

    /// Resident items in no particular order, without allocating a set.
    pub fn for_each_resident(&self, mut f: impl FnMut(ItemId)) {
        match &self.store {
            Store::Ranked { rank_of, .. } => rank_of.keys().for_each(|&x| f(x)),
            Store::Fifo { members, .. } => members.iter().for_each(|&x| f(x)),
            Store::Clock { slot_of, .. } => slot_of.keys().for_each(|&x| f(x)),
            Store::Flush { members } => members.iter().for_each(|&x| f(x)),
        }
    }

    /// Removes `item` from the cache. History is kept.
    pub fn delete(&mut self, item: ItemId) -> bool {
        match &mut self.store {
            Store::Ranked { rank_of, queue } => match rank_of.remove(&item) {
                Some(rank) => {
                    queue.remove(&rank);
                    true
                }
                None => false,
            },
            Store::Fifo { members, queue } => {
                if !members.remove(&item) {
                    return false;
                }
                let pos = queue.iter().position(|&x| x == item).expect("member is queued");
                queue.remove(pos);
                true
            }
            Store::Clock {
                slot_of,
                frames,
                referenced,
                ..
            } => match slot_of.remove(&item) {
                Some(slot) => {
                    frames[slot] = None;
                    referenced[slot] = false;
                    true
                }
                None => false,
            },
            Store::Flush { members } => members.remove(&item),
        }
    }

    /// Position of `item` in ⪯_σ, where σ is the history served so far.
    ///
    /// Computed from the raw timestamps and counts, independently of the
    /// structure that picks victims.
    pub fn eviction_rank_key(&self, item: ItemId) -> Result<OrderFamilyKey, PolicyError> {
        if !self.kind.has_order_family() {
            return Err(PolicyError::UnsupportedKind(self.kind));
        }
        let polarity = self.kind.polarity();
        let Some(h) = self.history.get(&item) else {
            let phi = match self.kind {
                PolicyKind::Lfu => Phi::Finite(0),
                _ => Phi::Infinite,
            };
            return Ok(OrderFamilyKey {
                phi,
                tiebreak: item,
                polarity,
                unaccessed: true,
            });
        };
        let n = h.recent.len();
        let phi = match self.kind {
            PolicyKind::Lru | PolicyKind::LruK(_) => {
                let k = self.kind.history_depth();
                if n >= k {
                    Phi::Finite(self.clock - h.recent[n - k])
                } else {
                    Phi::Infinite
                }
            }
            PolicyKind::Lfu => Phi::Finite(h.count),
            PolicyKind::ReuseDistance => {
                if n >= 2 {
                    Phi::Finite(h.recent[n - 1] - h.recent[n - 2] - 1)
                } else {
                    Phi::Infinite
                }
            }
            _ => unreachable!(),
        };
        Ok(OrderFamilyKey {
            phi,
            tiebreak: item,
            polarity,
            unaccessed: false,
        })
    }
}

impl Pager for PolicyInstance {
    fn capacity(&self) -> usize {
        PolicyInstance::capacity(self)
    }
    fn len(&self) -> usize {
        PolicyInstance::len(self)
    }
    fn contains(&self, item: ItemId) -> bool {
        PolicyInstance::contains(self, item)
    }
    fn access(&mut self, item: ItemId) -> AccessOutcome {
        PolicyInstance::access(self, item)
    }
    fn contents(&self) -> BTreeSet<ItemId> {
        PolicyInstance::contents(self)
    }
    fn delete(&mut self, item: ItemId) -> bool {
        PolicyInstance::delete(self, item)
    }
    fn rank_key(&self, item: ItemId) -> Result<OrderFamilyKey, PolicyError> {
        self.eviction_rank_key(item)
    }
}

/// Final state and cost of serving a whole trace from an empty cache.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub contents: BTreeSet<ItemId>,
    pub misses: u64,
    pub outcomes: Vec<AccessOutcome>,
}

pub fn replay(kind: PolicyKind, capacity: usize, trace: &Trace) -> Result<Replay, PolicyError> {
    let mut policy = PolicyInstance::new(kind, capacity)?;
    let outcomes: Vec<_> = trace.iter().map(|x| policy.access(x)).collect();
    let misses = outcomes.iter().filter(|o| !o.hit).count() as u64;
    Ok(Replay {
        contents: policy.contents(),
        misses,
        outcomes,
    })
}

/// Miss count only; avoids materializing outcomes.
pub fn miss_count(kind: PolicyKind, capacity: usize, trace: &Trace) -> Result<u64, PolicyError> {
    let mut policy = PolicyInstance::new(kind, capacity)?;
    Ok(trace.iter().filter(|&x| !policy.access(x).hit).count() as u64)
}
