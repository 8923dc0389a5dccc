//! Bounded exhaustive classification of paging policies.
//!
//! Each check enumerates every request sequence of length at most
//! `max_len` over a small universe, in length-then-lexicographic order, and
//! tests a class predicate at the final request of each sequence. The first
//! violation in that order is reported as a minimal counterexample. Any
//! reported witness can be re-validated from scratch with [`confirm_witness`].

mod checks;
mod search;

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{ItemId, Pager, PolicyInstance, PolicyKind};
use crate::trace::Trace;

pub use checks::{
    audit, check_conforms, check_conservative, check_family_monotone, check_family_self_similar, check_lazy,
    check_stable, check_stack, confirm_witness, evaluate_stable, find_belady_anomaly, ClassAudit, StableInstance,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("search space of {traces} traces exceeds the budget of {budget}")]
    BudgetExceeded { traces: u128, budget: u64 },
    #[error("{0} exposes no order family")]
    Unsupported(String),
    #[error("invalid search space: {0}")]
    InvalidSpace(&'static str),
}

/// Builds fresh pagers of a given capacity.
pub trait PagerFactory: Sync {
    type P: Pager + Clone + Send + Sync;
    fn build(&self, capacity: usize) -> Self::P;
    fn label(&self) -> String;
}

impl PagerFactory for PolicyKind {
    type P = PolicyInstance;

    fn build(&self, capacity: usize) -> PolicyInstance {
        PolicyInstance::new(*self, capacity).expect("search spaces use positive capacities")
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubsetFamily {
    All,
    /// `count` random subsets plus the whole universe.
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub universe_size: u64,
    pub max_len: usize,
    pub capacities: Vec<usize>,
    pub subsets: SubsetFamily,
    /// Upper bound on `universe_size ^ max_len`.
    pub budget: u64,
}

impl SearchSpace {
    pub const DEFAULT_BUDGET: u64 = 10_000_000;

    pub fn new(universe_size: u64, max_len: usize, capacities: impl IntoIterator<Item = usize>) -> Self {
        let mut capacities: Vec<usize> = capacities.into_iter().collect();
        capacities.sort_unstable();
        capacities.dedup();
        Self {
            universe_size,
            max_len,
            capacities,
            subsets: SubsetFamily::All,
            budget: Self::DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_subsets(mut self, subsets: SubsetFamily) -> Self {
        self.subsets = subsets;
        self
    }

    pub fn universe(&self) -> Vec<ItemId> {
        (0..self.universe_size).map(ItemId).collect()
    }

    /// `universe_size ^ max_len`.
    pub fn size(&self) -> u128 {
        (self.universe_size as u128).saturating_pow(self.max_len as u32)
    }

    pub(crate) fn validate(&self) -> Result<(), LabError> {
        if self.universe_size == 0 || self.universe_size > 64 {
            return Err(LabError::InvalidSpace("universe size must be in 1..=64"));
        }
        if self.capacities.is_empty() || self.capacities[0] == 0 {
            return Err(LabError::InvalidSpace("capacities must be nonempty and positive"));
        }
        if self.size() > self.budget as u128 {
            return Err(LabError::BudgetExceeded {
                traces: self.size(),
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Subsets of the universe, as bitmasks over item ids.
    pub(crate) fn subset_masks(&self) -> Vec<u64> {
        let u = self.universe_size as u32;
        let full = if u == 64 { u64::MAX } else { (1u64 << u) - 1 };
        match &self.subsets {
            SubsetFamily::All => (1..=full).collect(),
            SubsetFamily::Sampled { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut masks: BTreeSet<u64> = (0..*count).map(|_| rng.random::<u64>() & full).filter(|&m| m != 0).collect();
                masks.insert(full);
                masks.into_iter().collect()
            }
        }
    }
}

pub(crate) fn mask_to_set(mask: u64) -> BTreeSet<ItemId> {
    (0..64).filter(|i| mask >> i & 1 == 1).map(ItemId).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Predicate {
    Lazy,
    Conservative,
    Stack,
    Stable,
    Conforms,
    MonotoneFamily,
    SelfSimilarFamily,
    BeladyAnomalyFree,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Predicate::Lazy => "LAZY",
            Predicate::Conservative => "CONSERVATIVE",
            Predicate::Stack => "STACK",
            Predicate::Stable => "STABLE",
            Predicate::Conforms => "CONFORMS",
            Predicate::MonotoneFamily => "MONOTONE-FAMILY",
            Predicate::SelfSimilarFamily => "SELF-SIMILAR-FAMILY",
            Predicate::BeladyAnomalyFree => "BELADY-ANOMALY-FREE",
        };
        f.write_str(s)
    }
}

/// A counterexample. `trace` is the full request sequence whose final
/// request exhibits the violation; the other fields are filled as the
/// predicate requires.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub trace: Trace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<BTreeSet<ItemId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item: Option<ItemId>,
    /// Cache sizes involved: one size, or `[a, b]` with `a > b`.
    pub sizes: Vec<usize>,
    /// Half-open request window `[start, end)`, for the conservative check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(usize, usize)>,
    pub violating: BTreeSet<ItemId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub predicate: Predicate,
    pub policy: String,
    pub pass: bool,
    pub witness: Option<Witness>,
    pub space: SearchSpace,
    /// Sequences examined before the search finished or was cut off by the
    /// witness length.
    pub traces_checked: u64,
}

#[cfg(test)]
mod tests;
