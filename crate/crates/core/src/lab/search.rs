use rayon::prelude::*;

use super::{PagerFactory, SearchSpace, Witness};
use crate::policy::{AccessOutcome, ItemId, Pager};

/// What a predicate sees at the final request of a sequence.
pub(crate) struct Node<'a, P> {
    pub trace: &'a [ItemId],
    /// One pager per tracked capacity, before the final request.
    pub before: &'a [P],
    pub after: &'a [P],
    pub outcomes: &'a [AccessOutcome],
    /// `missed[s][i]` is whether pager `s` missed on request `i`.
    pub missed: &'a [Vec<bool>],
}

pub(crate) struct Outcome {
    pub witness: Option<Witness>,
    pub traces_checked: u64,
}

struct Dfs<'a, P, C> {
    universe: &'a [ItemId],
    max_len: usize,
    check: &'a C,
    trace: Vec<ItemId>,
    missed: Vec<Vec<bool>>,
    best: Option<Witness>,
    checked: u64,
    _p: std::marker::PhantomData<P>,
}

impl<P, C> Dfs<'_, P, C>
where
    P: Pager + Clone,
    C: Fn(&Node<'_, P>) -> Option<Witness>,
{
    fn best_len(&self) -> usize {
        self.best.as_ref().map_or(usize::MAX, |w| w.trace.len())
    }

    fn visit(&mut self, before: &[P], w: ItemId) {
        let mut after = before.to_vec();
        let outcomes: Vec<AccessOutcome> = after.iter_mut().map(|p| p.access(w)).collect();
        self.trace.push(w);
        for (m, o) in self.missed.iter_mut().zip(&outcomes) {
            m.push(!o.hit);
        }
        self.checked += 1;

        let node = Node {
            trace: &self.trace,
            before,
            after: &after,
            outcomes: &outcomes,
            missed: &self.missed,
        };
        if let Some(wit) = (self.check)(&node) {
            // Siblings are visited in increasing order, so a shorter or
            // lexicographically smaller candidate always beats the current one.
            let better = match &self.best {
                None => true,
                Some(b) => (wit.trace.len(), wit.trace.as_slice()) < (b.trace.len(), b.trace.as_slice()),
            };
            if better {
                self.best = Some(wit);
            }
        }

        if self.trace.len() < self.max_len && self.trace.len() < self.best_len() {
            for &next in self.universe {
                if self.trace.len() + 1 > self.best_len() {
                    break;
                }
                self.visit(&after, next);
            }
        }

        self.trace.pop();
        for m in self.missed.iter_mut() {
            m.pop();
        }
    }
}

/// Depth-first search over all sequences of length `1..=max_len`, returning
/// the least violation in (length, lexicographic) order.
///
/// `capacities` lists one pager per entry; the predicate indexes them in the
/// same order.
pub(crate) fn search<F, C>(factory: &F, space: &SearchSpace, capacities: &[usize], check: C) -> Outcome
where
    F: PagerFactory,
    C: Fn(&Node<'_, F::P>) -> Option<Witness> + Sync,
{
    let universe = space.universe();
    let root: Vec<F::P> = capacities.iter().map(|&c| factory.build(c)).collect();
    if space.max_len == 0 {
        return Outcome {
            witness: None,
            traces_checked: 0,
        };
    }

    let per_root: Vec<(Option<Witness>, u64)> = universe
        .par_iter()
        .map(|&first| {
            let mut dfs = Dfs {
                universe: &universe,
                max_len: space.max_len,
                check: &check,
                trace: Vec::with_capacity(space.max_len),
                missed: vec![Vec::with_capacity(space.max_len); capacities.len()],
                best: None,
                checked: 0,
                _p: std::marker::PhantomData,
            };
            dfs.visit(&root, first);
            (dfs.best, dfs.checked)
        })
        .collect();

    let traces_checked = per_root.iter().map(|r| r.1).sum();
    let witness = per_root
        .into_iter()
        .filter_map(|r| r.0)
        .min_by(|a, b| (a.trace.len(), a.trace.as_slice()).cmp(&(b.trace.len(), b.trace.as_slice())));
    Outcome {
        witness,
        traces_checked,
    }
}
