use serde::{Deserialize, Serialize};

use crate::policy::ItemId;

/// splitmix64 output function.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seeded map from items to buckets `[0, bucket_count)`.
///
/// The bucket of an item is a pure function of `(seed, item)`, so repeated
/// lookups are consistent without a memo table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashIndexer {
    seed: u64,
    bucket_count: usize,
}

impl HashIndexer {
    pub fn new(seed: u64, bucket_count: usize) -> Self {
        assert!(bucket_count > 0, "bucket_count must be positive");
        Self { seed, bucket_count }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_count
    }

    #[inline]
    pub fn bucket(&self, item: ItemId) -> usize {
        let h = mix64(mix64(item.0 ^ self.seed) ^ self.seed.rotate_left(29));
        // Multiply-shift range reduction.
        ((h as u128 * self.bucket_count as u128) >> 64) as usize
    }
}

/// Deterministic stream of indexer seeds: one for the initial hash function
/// and one per rehash.
#[derive(Clone, Debug)]
pub struct SeedStream {
    state: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_seed(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }
}
