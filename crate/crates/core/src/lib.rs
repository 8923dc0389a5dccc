//! Trace-driven paging laboratory.
//!
//! The crate is organized bottom-up:
//!
//! - [`policy`]: single-cache eviction policies (LRU, LRU-K, LFU, FIFO, CLOCK,
//!   flush-when-full, reuse distance) and the order-family keys that describe
//!   the eviction order of the stack policies.
//! - [`cache`]: α-way set-associative caches built from per-bucket policy
//!   instances, with seeded hash indexing, full and incremental rehashing, and
//!   the lockstep pair runner that tallies bad evictions against a reference.
//! - [`lab`]: bounded exhaustive search deciding membership in the lazy,
//!   conservative, stack and stable classes, with minimal counterexamples.
//! - [`adversary`]: adversarial and synthetic request sequences.
//! - [`ballsbins`]: exact and Monte Carlo balls-and-bins quantities.

pub mod adversary;
pub mod ballsbins;
pub mod cache;
pub mod lab;
pub mod policy;
mod trace;

pub use policy::{AccessOutcome, ItemId, Pager, PolicyInstance, PolicyKind};
pub use trace::Trace;
