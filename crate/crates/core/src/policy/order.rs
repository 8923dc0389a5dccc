//! Order-family keys.
//!
//! A stack policy evicts the resident item that is largest under a
//! history-dependent total order. Each such order is generated by a scalar
//! `phi` per item, a polarity saying whether larger `phi` sorts later or
//! earlier, and an id tie-break. Items that were never requested sort after
//! every requested item, by id.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ItemId;

/// A non-negative integer or infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phi {
    Finite(u64),
    Infinite,
}

impl Phi {
    pub fn is_finite(self) -> bool {
        matches!(self, Phi::Finite(_))
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Finite(v) => write!(f, "{v}"),
            Phi::Infinite => f.write_str("inf"),
        }
    }
}

/// How `phi` maps onto the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// Larger `phi` is larger in the order (LRU-K, reuse distance).
    LargerPhiLater,
    /// Larger `phi` is smaller in the order (LFU).
    LargerPhiEarlier,
}

/// Position of one item in the order ⪯_σ of a policy's history σ.
///
/// Sorting a policy's residents by this key reproduces its eviction order:
/// the maximum is the next victim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderFamilyKey {
    pub phi: Phi,
    pub tiebreak: ItemId,
    pub polarity: Polarity,
    /// Set for items absent from the history.
    pub unaccessed: bool,
}

impl Ord for OrderFamilyKey {
    fn cmp(&self, other: &Self) -> Ordering {
        // Keys from one family share a polarity; comparing it first keeps the
        // relation total across families.
        self.polarity
            .cmp(&other.polarity)
            .then(self.unaccessed.cmp(&other.unaccessed))
            .then_with(|| match self.polarity {
                Polarity::LargerPhiLater => self.phi.cmp(&other.phi),
                Polarity::LargerPhiEarlier => other.phi.cmp(&self.phi),
            })
            .then(self.tiebreak.cmp(&other.tiebreak))
    }
}

impl PartialOrd for OrderFamilyKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
