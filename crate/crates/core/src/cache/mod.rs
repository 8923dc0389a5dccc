//! Set-associative caches.
//!
//! A cache of `k` slots is split into `k / alpha` buckets, each driven by its
//! own [`PolicyInstance`] of capacity `alpha`. Requests are routed by a seeded
//! [`HashIndexer`]. Optional rehashing draws a new indexer every `threshold`
//! demand misses, either flushing the whole cache at once or migrating items
//! lazily while two indexers are live.

mod hash;
mod pair;
mod set_assoc;

use thiserror::Error;

use crate::policy::PolicyError;

pub use hash::{mix64, HashIndexer, SeedStream};
pub use pair::{run_pair, PairRunReport, PairRunner, PairStep};
pub use set_assoc::{RehashConfig, RehashMode, SetAssocCache};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("k and alpha must be positive (k = {k}, alpha = {alpha})")]
    Zero { k: usize, alpha: usize },
    #[error("alpha = {alpha} does not divide k = {k}")]
    NotDivisible { k: usize, alpha: usize },
    #[error("operation requires rehash mode {expected:?}, cache is in {actual:?}")]
    WrongMode { expected: RehashMode, actual: RehashMode },
    #[error("a rehash is already in progress")]
    RehashInProgress,
    #[error("rehash threshold {threshold} invalid for k = {k}: {reason}")]
    BadThreshold { threshold: u64, k: usize, reason: &'static str },
    #[error(transparent)]
    Policy(#[from] PolicyError),
}
