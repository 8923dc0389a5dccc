use std::collections::BTreeSet;
use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::policy::ItemId;

/// A finite request sequence.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    items: Vec<ItemId>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            items: Vec::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, item: ItemId) {
        self.items.push(item);
    }

    /// Appends `item` and returns the extended sequence.
    pub fn appended(&self, item: ItemId) -> Trace {
        let mut out = self.clone();
        out.push(item);
        out
    }

    pub fn extend_from(&mut self, other: &Trace) {
        self.items.extend_from_slice(&other.items);
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, ItemId>> {
        self.items.iter().copied()
    }

    pub fn as_slice(&self) -> &[ItemId] {
        &self.items
    }

    pub fn into_vec(self) -> Vec<ItemId> {
        self.items
    }

    /// The subsequence of requests for items in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<ItemId>) -> Trace {
        self.iter().filter(|x| keep.contains(x)).collect()
    }

    /// The subsequence of requests for which `keep` holds.
    pub fn restrict_by(&self, mut keep: impl FnMut(ItemId) -> bool) -> Trace {
        self.iter().filter(|&x| keep(x)).collect()
    }

    /// Distinct items, ascending.
    pub fn distinct(&self) -> BTreeSet<ItemId> {
        self.iter().collect()
    }

    /// Every id shifted up by `offset`; used to place generated traces in disjoint id ranges.
    pub fn shifted(&self, offset: u64) -> Trace {
        self.iter().map(|x| ItemId(x.0 + offset)).collect()
    }
}

impl From<Vec<ItemId>> for Trace {
    fn from(items: Vec<ItemId>) -> Self {
        Self { items }
    }
}

impl From<Vec<u64>> for Trace {
    fn from(items: Vec<u64>) -> Self {
        items.into_iter().map(ItemId).collect()
    }
}

impl Extend<ItemId> for Trace {
    fn extend<I: IntoIterator<Item = ItemId>>(&mut self, iter: I) {
        self.items.extend(iter);
    }
}

impl FromIterator<ItemId> for Trace {
    fn from_iter<I: IntoIterator<Item = ItemId>>(iter: I) -> Self {
        Self {
            items: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Trace {
    type Item = ItemId;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, ItemId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

impl Index<usize> for Trace {
    type Output = ItemId;

    fn index(&self, i: usize) -> &ItemId {
        &self.items[i]
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.items.iter().map(|x| x.0)).finish()
    }
}
