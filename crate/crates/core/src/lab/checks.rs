use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::search::{search, Node};
use super::{mask_to_set, ClassVerdict, LabError, PagerFactory, Predicate, SearchSpace, Witness};
use crate::policy::{ItemId, OrderFamilyKey, Pager};
use crate::trace::Trace;

fn verdict<F: PagerFactory>(
    predicate: Predicate,
    factory: &F,
    space: &SearchSpace,
    outcome: super::search::Outcome,
) -> ClassVerdict {
    ClassVerdict {
        predicate,
        policy: factory.label(),
        pass: outcome.witness.is_none(),
        witness: outcome.witness,
        space: space.clone(),
        traces_checked: outcome.traces_checked,
    }
}

fn witness(trace: &[ItemId]) -> Witness {
    Witness {
        trace: trace.to_vec().into(),
        subset: None,
        item: None,
        sizes: Vec::new(),
        window: None,
        violating: BTreeSet::new(),
    }
}

fn fed<P: Pager>(mut p: P, items: impl IntoIterator<Item = ItemId>) -> P {
    for x in items {
        p.access(x);
    }
    p
}

fn key<P: Pager>(p: &P, x: ItemId) -> OrderFamilyKey {
    p.rank_key(x).expect("order family support checked up front")
}

fn require_order_family<F: PagerFactory>(factory: &F) -> Result<(), LabError> {
    factory
        .build(1)
        .rank_key(ItemId(0))
        .map(|_| ())
        .map_err(|_| LabError::Unsupported(factory.label()))
}

/// Which clause of laziness the final request of a replay breaks, if any.
fn lazy_violation<P: Pager>(before: &P, after: &P, z: ItemId, hit: bool, evicted: &[ItemId]) -> Option<BTreeSet<ItemId>> {
    let pre = before.contents();
    let post = after.contents();
    let mut expected = pre.clone();
    for e in evicted {
        expected.remove(e);
    }
    expected.insert(z);
    let bad_fetch = post != expected || !evicted.iter().all(|e| pre.contains(e));
    let bad_evict = if hit {
        !evicted.is_empty()
    } else {
        evicted.len() > 1 || (!evicted.is_empty() && pre.len() < before.capacity())
    };
    if bad_fetch || bad_evict {
        let mut v: BTreeSet<ItemId> = evicted.iter().copied().collect();
        v.extend(post.symmetric_difference(&expected).copied());
        Some(v)
    } else {
        None
    }
}

/// Fetches only on a miss, evicts at most once per miss and only when full.
pub fn check_lazy<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    let caps = space.capacities.clone();
    let out = search(factory, space, &caps, |n: &Node<'_, F::P>| {
        let z = *n.trace.last().unwrap();
        for (s, &c) in caps.iter().enumerate() {
            let o = &n.outcomes[s];
            if let Some(v) = lazy_violation(&n.before[s], &n.after[s], z, o.hit, &o.evicted) {
                let mut w = witness(n.trace);
                w.item = Some(z);
                w.sizes = vec![c];
                w.violating = v;
                return Some(w);
            }
        }
        None
    });
    Ok(verdict(Predicate::Lazy, factory, space, out))
}

/// At most `k` misses on any window with at most `k` distinct items, for a
/// cache of `k` slots.
pub fn check_conservative<F: PagerFactory>(factory: &F, space: &SearchSpace, k: usize) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    if k == 0 {
        return Err(LabError::InvalidSpace("conservative check needs k > 0"));
    }
    let out = search(factory, space, &[k], |n: &Node<'_, F::P>| {
        let missed = &n.missed[0];
        let end = n.trace.len();
        let mut distinct = BTreeSet::new();
        let mut misses = 0usize;
        for start in (0..end).rev() {
            distinct.insert(n.trace[start]);
            if distinct.len() > k {
                break;
            }
            misses += usize::from(missed[start]);
            if misses > k {
                let mut w = witness(n.trace);
                w.sizes = vec![k];
                w.window = Some((start, end));
                w.violating = distinct;
                return Some(w);
            }
        }
        None
    });
    let mut v = verdict(Predicate::Conservative, factory, space, out);
    v.space.capacities = vec![k];
    Ok(v)
}

/// Inclusion `A_b(σ) ⊆ A_a(σ)` for each pair of adjacent capacities `b < a`.
pub fn check_stack<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    let caps = space.capacities.clone();
    let out = search(factory, space, &caps, |n: &Node<'_, F::P>| {
        for s in 1..caps.len() {
            let small = n.after[s - 1].contents();
            let big = n.after[s].contents();
            if !small.is_subset(&big) {
                let mut w = witness(n.trace);
                w.sizes = vec![caps[s], caps[s - 1]];
                w.violating = small.difference(&big).copied().collect();
                return Some(w);
            }
        }
        None
    });
    Ok(verdict(Predicate::Stack, factory, space, out))
}

/// Both machines of the stability implication, evaluated at one instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableInstance {
    /// Evicted by the small cache on the final request of `τ[X]z`.
    pub small_out: Vec<ItemId>,
    /// Evicted by the large cache on the final request of `τz`.
    pub large_out: Vec<ItemId>,
    pub small_after: BTreeSet<ItemId>,
    pub large_after: BTreeSet<ItemId>,
    pub antecedent: bool,
    pub violated: bool,
}

fn stable_from_states<P: Pager + Clone>(small_before: &P, large_after: &P, large_out: Vec<ItemId>, z: ItemId) -> StableInstance {
    let mut small = small_before.clone();
    let small_out = small.access(z).evicted;
    let small_after = small.contents();
    let large_after_set = large_after.contents();
    let antecedent = small_out.iter().any(|e| large_after_set.contains(e));
    let violated = antecedent && !small_after.is_subset(&large_after_set);
    StableInstance {
        small_out,
        large_out,
        small_after,
        large_after: large_after_set,
        antecedent,
        violated,
    }
}

/// Evaluates the stability implication for `trace = τz`, the subset `X`
/// (which must contain `z`) and sizes `a > b`.
pub fn evaluate_stable<F: PagerFactory>(
    factory: &F,
    trace: &Trace,
    subset: &BTreeSet<ItemId>,
    a: usize,
    b: usize,
) -> StableInstance {
    let (&z, tau) = trace.as_slice().split_last().expect("trace must be nonempty");
    let small = fed(factory.build(b), tau.iter().copied().filter(|x| subset.contains(x)));
    let mut large = fed(factory.build(a), tau.iter().copied());
    let large_out = large.access(z).evicted;
    stable_from_states(&small, &large, large_out, z)
}

/// `Out(A_b, τ[X], z) ∩ A_a(τz) ≠ ∅` implies `A_b(τ[X]z) ⊆ A_a(τz)`, for
/// every `X ∋ z` in the subset family and every pair `a > b` of capacities.
pub fn check_stable<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    let caps = space.capacities.clone();
    let masks = space.subset_masks();
    let out = search(factory, space, &caps, |n: &Node<'_, F::P>| {
        let (&z, tau) = n.trace.split_last().unwrap();
        for &mask in masks.iter().filter(|&&m| m >> z.0 & 1 == 1) {
            let sub: Vec<ItemId> = tau.iter().copied().filter(|x| mask >> x.0 & 1 == 1).collect();
            for bi in 0..caps.len() {
                let small = fed(factory.build(caps[bi]), sub.iter().copied());
                for ai in bi + 1..caps.len() {
                    let inst = stable_from_states(&small, &n.after[ai], n.outcomes[ai].evicted.clone(), z);
                    if inst.violated {
                        let mut w = witness(n.trace);
                        w.subset = Some(mask_to_set(mask));
                        w.item = Some(z);
                        w.sizes = vec![caps[ai], caps[bi]];
                        w.violating = inst.small_after.difference(&inst.large_after).copied().collect();
                        return Some(w);
                    }
                }
            }
        }
        None
    });
    Ok(verdict(Predicate::Stable, factory, space, out))
}

/// Every retained resident precedes every evicted one in the policy's own
/// order after the request.
pub fn check_conforms<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    require_order_family(factory)?;
    let caps = space.capacities.clone();
    let out = search(factory, space, &caps, |n: &Node<'_, F::P>| {
        for (s, &c) in caps.iter().enumerate() {
            let evicted = &n.outcomes[s].evicted;
            if evicted.is_empty() {
                continue;
            }
            let after = &n.after[s];
            for x in n.before[s].contents() {
                if evicted.contains(&x) {
                    continue;
                }
                for &y in evicted {
                    if key(after, y) < key(after, x) {
                        let mut w = witness(n.trace);
                        w.sizes = vec![c];
                        w.item = n.trace.last().copied();
                        w.violating = [x, y].into_iter().collect();
                        return Some(w);
                    }
                }
            }
        }
        None
    });
    Ok(verdict(Predicate::Conforms, factory, space, out))
}

/// For `σz` and distinct `x, y ∈ σ` with `y ≠ z`: `x ≺_σ y` implies
/// `x ≺_{σz} y`. `z` ranges over the whole universe.
pub fn check_family_monotone<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    require_order_family(factory)?;
    let hist = space.universe_size as usize;
    let out = search(factory, space, &[hist], |n: &Node<'_, F::P>| {
        let (&z, sigma) = n.trace.split_last().unwrap();
        let items: BTreeSet<ItemId> = sigma.iter().copied().collect();
        let (pre, post) = (&n.before[0], &n.after[0]);
        for &x in &items {
            for &y in &items {
                if x == y || y == z {
                    continue;
                }
                if key(pre, x) < key(pre, y) && key(post, x) > key(post, y) {
                    let mut w = witness(n.trace);
                    w.item = Some(z);
                    w.violating = [x, y].into_iter().collect();
                    return Some(w);
                }
            }
        }
        None
    });
    let mut v = verdict(Predicate::MonotoneFamily, factory, space, out);
    v.space.capacities = vec![hist];
    Ok(v)
}

/// For every `X` and distinct `x, y ∈ σ[X]`: `x ≺_{σ[X]} y` implies `x ≺_σ y`.
pub fn check_family_self_similar<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    require_order_family(factory)?;
    let hist = space.universe_size as usize;
    let masks = space.subset_masks();
    let out = search(factory, space, &[hist], |n: &Node<'_, F::P>| {
        let full = &n.after[0];
        for &mask in &masks {
            let sub: Vec<ItemId> = n.trace.iter().copied().filter(|x| mask >> x.0 & 1 == 1).collect();
            if sub.len() < 2 {
                continue;
            }
            let items: BTreeSet<ItemId> = sub.iter().copied().collect();
            let part = fed(factory.build(hist), sub.iter().copied());
            for &x in &items {
                for &y in &items {
                    if x != y && key(&part, x) < key(&part, y) && key(full, x) > key(full, y) {
                        let mut w = witness(n.trace);
                        w.subset = Some(mask_to_set(mask));
                        w.violating = [x, y].into_iter().collect();
                        return Some(w);
                    }
                }
            }
        }
        None
    });
    let mut v = verdict(Predicate::SelfSimilarFamily, factory, space, out);
    v.space.capacities = vec![hist];
    Ok(v)
}

/// Searches for `σ` and `a > b` with `C(A_a, σ) > C(A_b, σ)`. The verdict
/// passes when no anomaly exists in the space.
pub fn find_belady_anomaly<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassVerdict, LabError> {
    space.validate()?;
    let caps = space.capacities.clone();
    let out = search(factory, space, &caps, |n: &Node<'_, F::P>| {
        let cost: Vec<usize> = n.missed.iter().map(|m| m.iter().filter(|&&b| b).count()).collect();
        for bi in 0..caps.len() {
            for ai in bi + 1..caps.len() {
                if cost[ai] > cost[bi] {
                    let mut w = witness(n.trace);
                    w.sizes = vec![caps[ai], caps[bi]];
                    return Some(w);
                }
            }
        }
        None
    });
    Ok(verdict(Predicate::BeladyAnomalyFree, factory, space, out))
}

/// Re-derives the violation recorded in `w` from empty caches. Returns
/// false if the witness does not demonstrate a violation of `predicate`.
pub fn confirm_witness<F: PagerFactory>(predicate: Predicate, factory: &F, w: &Witness) -> bool {
    let Some((&z, tau)) = w.trace.as_slice().split_last() else {
        return false;
    };
    match predicate {
        Predicate::Lazy => {
            let Some(&c) = w.sizes.first() else { return false };
            let before = fed(factory.build(c), tau.iter().copied());
            let mut after = before.clone();
            let o = after.access(z);
            lazy_violation(&before, &after, z, o.hit, &o.evicted).is_some()
        }
        Predicate::Conservative => {
            let (Some(&k), Some((start, end))) = (w.sizes.first(), w.window) else {
                return false;
            };
            if start >= end || end > w.trace.len() {
                return false;
            }
            let mut p = factory.build(k);
            let missed: Vec<bool> = w.trace.iter().map(|x| !p.access(x).hit).collect();
            let window = &w.trace.as_slice()[start..end];
            let distinct: BTreeSet<_> = window.iter().collect();
            let misses = missed[start..end].iter().filter(|&&m| m).count();
            distinct.len() <= k && misses > k
        }
        Predicate::Stack => {
            let [a, b] = w.sizes[..] else { return false };
            let small = fed(factory.build(b), w.trace.iter()).contents();
            let big = fed(factory.build(a), w.trace.iter()).contents();
            a > b && !small.is_subset(&big)
        }
        Predicate::Stable => {
            let (&[a, b], Some(x)) = (&w.sizes[..], w.subset.as_ref()) else {
                return false;
            };
            a > b && x.contains(&z) && evaluate_stable(factory, &w.trace, x, a, b).violated
        }
        Predicate::Conforms => {
            let Some(&c) = w.sizes.first() else { return false };
            let before = fed(factory.build(c), tau.iter().copied());
            let mut after = before.clone();
            let evicted = after.access(z).evicted;
            let Ok(_) = after.rank_key(z) else { return false };
            before.contents().into_iter().filter(|x| !evicted.contains(x)).any(|x| {
                evicted.iter().any(|&y| key(&after, y) < key(&after, x))
            })
        }
        Predicate::MonotoneFamily => {
            let hist = w.trace.distinct().len().max(1);
            let pre = fed(factory.build(hist), tau.iter().copied());
            let post = fed(pre.clone(), [z]);
            let Ok(_) = pre.rank_key(z) else { return false };
            let items: BTreeSet<ItemId> = tau.iter().copied().collect();
            items.iter().any(|&x| {
                items.iter().any(|&y| {
                    x != y && y != z && key(&pre, x) < key(&pre, y) && key(&post, x) > key(&post, y)
                })
            })
        }
        Predicate::SelfSimilarFamily => {
            let Some(x_set) = w.subset.as_ref() else { return false };
            let hist = w.trace.distinct().len().max(1);
            let full = fed(factory.build(hist), w.trace.iter());
            let sub = w.trace.restrict(x_set);
            let part = fed(factory.build(hist), sub.iter());
            let Ok(_) = full.rank_key(z) else { return false };
            let items = sub.distinct();
            items.iter().any(|&x| {
                items.iter().any(|&y| x != y && key(&part, x) < key(&part, y) && key(&full, x) > key(&full, y))
            })
        }
        Predicate::BeladyAnomalyFree => {
            let [a, b] = w.sizes[..] else { return false };
            let cost = |c: usize| {
                let mut p = factory.build(c);
                w.trace.iter().filter(|&x| !p.access(x).hit).count()
            };
            a > b && cost(a) > cost(b)
        }
    }
}

/// Verdicts for one policy over one search space. Order-family checks are
/// `None` for policies that expose no order family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassAudit {
    pub policy: String,
    pub lazy: ClassVerdict,
    /// One verdict per capacity in the space.
    pub conservative: Vec<ClassVerdict>,
    pub stack: ClassVerdict,
    pub stable: ClassVerdict,
    pub belady: ClassVerdict,
    pub conforms: Option<ClassVerdict>,
    pub monotone: Option<ClassVerdict>,
    pub self_similar: Option<ClassVerdict>,
}

impl ClassAudit {
    pub fn is_conservative(&self) -> bool {
        self.conservative.iter().all(|v| v.pass)
    }

    fn family(v: &Option<ClassVerdict>) -> bool {
        v.as_ref().is_some_and(|v| v.pass)
    }

    /// Implications between classes that the verdicts contradict. Each is
    /// restricted to the searched space, so an empty list is the expected
    /// outcome for any correct policy.
    pub fn hierarchy_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.lazy.pass && self.stable.pass && !self.stack.pass {
            out.push("lazy and stable but not stack".to_string());
        }
        if self.lazy.pass && Self::family(&self.conforms) && !self.stack.pass {
            out.push("lazy and conforming but not stack".to_string());
        }
        if self.stack.pass && !self.belady.pass {
            out.push("stack but shows Belady's anomaly".to_string());
        }
        if self.lazy.pass
            && Self::family(&self.conforms)
            && Self::family(&self.monotone)
            && Self::family(&self.self_similar)
            && !self.stable.pass
        {
            out.push("lazy, conforming to a monotone self-similar family, but not stable".to_string());
        }
        out
    }
}

pub fn audit<F: PagerFactory>(factory: &F, space: &SearchSpace) -> Result<ClassAudit, LabError> {
    let optional = |r: Result<ClassVerdict, LabError>| match r {
        Ok(v) => Ok(Some(v)),
        Err(LabError::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(ClassAudit {
        policy: factory.label(),
        lazy: check_lazy(factory, space)?,
        conservative: space
            .capacities
            .iter()
            .map(|&k| check_conservative(factory, space, k))
            .collect::<Result<_, _>>()?,
        stack: check_stack(factory, space)?,
        stable: check_stable(factory, space)?,
        belady: find_belady_anomaly(factory, space)?,
        conforms: optional(check_conforms(factory, space))?,
        monotone: optional(check_family_monotone(factory, space))?,
        self_similar: optional(check_family_self_similar(factory, space))?,
    })
}
