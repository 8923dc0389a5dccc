//! Class-membership and balls-and-bins audits as report rows.

use assoclab_core::ballsbins::{
    exact_overflow_probability, mc_overflow_probability, mc_saturated_bins, overflow_bound, saturation_bound,
    BallsBinsParams,
};
use assoclab_core::lab::{audit, confirm_witness, ClassAudit, ClassVerdict, SearchSpace};
use assoclab_core::{ItemId, PolicyKind};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::report::ReportRow;
use crate::ExperimentError;

fn join<I: IntoIterator<Item = T>, T: ToString>(xs: I) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// One verdict, flattened. Lists are space-separated; absent parts are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub policy: String,
    pub predicate: String,
    /// Capacity for per-capacity predicates, empty otherwise.
    pub capacity: Option<usize>,
    pub pass: bool,
    pub witness_confirmed: Option<bool>,
    pub traces_checked: u64,
    pub universe_size: u64,
    pub max_len: usize,
    pub capacities: String,
    pub witness_trace: String,
    pub witness_subset: String,
    pub witness_item: Option<u64>,
    pub witness_sizes: String,
    pub witness_window: String,
    pub witness_violating: String,
}

impl ReportRow for VerdictRow {
    const HEADER: &'static [&'static str] = &[
        "policy",
        "predicate",
        "capacity",
        "pass",
        "witness_confirmed",
        "traces_checked",
        "universe_size",
        "max_len",
        "capacities",
        "witness_trace",
        "witness_subset",
        "witness_item",
        "witness_sizes",
        "witness_window",
        "witness_violating",
    ];
}

impl VerdictRow {
    pub fn new(v: &ClassVerdict, capacity: Option<usize>, kind: PolicyKind) -> Self {
        let w = v.witness.as_ref();
        let ids = |s: &std::collections::BTreeSet<ItemId>| join(s.iter().map(|x| x.0));
        Self {
            policy: v.policy.clone(),
            predicate: v.predicate.to_string(),
            capacity,
            pass: v.pass,
            witness_confirmed: w.map(|w| confirm_witness(v.predicate, &kind, w)),
            traces_checked: v.traces_checked,
            universe_size: v.space.universe_size,
            max_len: v.space.max_len,
            capacities: join(&v.space.capacities),
            witness_trace: w.map(|w| join(w.trace.iter().map(|x| x.0))).unwrap_or_default(),
            witness_subset: w.and_then(|w| w.subset.as_ref()).map(ids).unwrap_or_default(),
            witness_item: w.and_then(|w| w.item).map(|x| x.0),
            witness_sizes: w.map(|w| join(&w.sizes)).unwrap_or_default(),
            witness_window: w
                .and_then(|w| w.window)
                .map(|(a, b)| format!("{a} {b}"))
                .unwrap_or_default(),
            witness_violating: w.map(|w| ids(&w.violating)).unwrap_or_default(),
        }
    }
}

/// Every verdict of an audit, in a fixed order.
pub fn verdict_rows(kind: PolicyKind, a: &ClassAudit) -> Vec<VerdictRow> {
    let mut out = vec![VerdictRow::new(&a.lazy, None, kind)];
    for (v, &k) in a.conservative.iter().zip(&a.lazy.space.capacities) {
        out.push(VerdictRow::new(v, Some(k), kind));
    }
    for v in [&a.stack, &a.stable, &a.belady] {
        out.push(VerdictRow::new(v, None, kind));
    }
    for v in [&a.conforms, &a.monotone, &a.self_similar].into_iter().flatten() {
        out.push(VerdictRow::new(v, None, kind));
    }
    out
}

/// The policies audited when none are named.
pub fn default_audit_kinds() -> Vec<PolicyKind> {
    vec![
        PolicyKind::Lru,
        PolicyKind::LruK(2),
        PolicyKind::Lfu,
        PolicyKind::Fifo,
        PolicyKind::Clock,
        PolicyKind::FlushWhenFull,
        PolicyKind::ReuseDistance,
    ]
}

pub fn run_class_audits(kinds: &[PolicyKind], space: &SearchSpace) -> Result<Vec<(PolicyKind, ClassAudit)>, ExperimentError> {
    kinds
        .iter()
        .map(|&k| Ok((k, audit(&k, space)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum BallsBinsCheck {
    /// Monte Carlo overflow frequency against the exact probability.
    Oracle,
    /// Overflow frequency against the upper bound `exp(-δ²α/12)`.
    OverflowBound,
    /// Saturation frequency against the lower bound `1 - exp(-f/32)`.
    SaturationBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallsBinsRow {
    pub check: BallsBinsCheck,
    pub m: u64,
    pub n: u64,
    pub alpha: Option<u64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// Exact probability for ORACLE rows, the bound otherwise.
    pub reference: f64,
    /// For bound rows, whether the parameters meet the bound's hypotheses.
    pub in_range: bool,
    pub holds: bool,
}

impl ReportRow for BallsBinsRow {
    const HEADER: &'static [&'static str] = &[
        "check",
        "m",
        "n",
        "alpha",
        "delta",
        "epsilon",
        "trials",
        "seed",
        "estimate",
        "stderr",
        "reference",
        "in_range",
        "holds",
    ];
}

/// Tolerance, in standard errors, for every statistical comparison.
pub const SIGMAS: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallsBinsGrid {
    pub oracle_cases: Vec<(u64, u64, u64)>,
    pub overflow_k: u64,
    pub overflow_alphas: Vec<u64>,
    pub saturation_ns: Vec<u64>,
    pub saturation_hs: Vec<u64>,
    pub saturation_eps: Vec<f64>,
    pub trials: u64,
}

impl Default for BallsBinsGrid {
    fn default() -> Self {
        Self {
            oracle_cases: oracle_cases(1_000_000),
            overflow_k: 4096,
            overflow_alphas: vec![64, 128, 256, 512],
            saturation_ns: vec![64, 256],
            saturation_hs: vec![4, 16],
            saturation_eps: vec![0.25, 0.5],
            trials: 10_000,
        }
    }
}

/// `(m, n, α)` with `2 ≤ n ≤ 10`, `n^m ≤ limit`, `m ≥ 2` and `1 ≤ α < m`:
/// every case with a nontrivial overflow event that brute force could
/// enumerate.
pub fn oracle_cases(limit: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for n in 2..=10u64 {
        let mut m = 2u32;
        while n.checked_pow(m).is_some_and(|p| p <= limit) {
            for alpha in 1..u64::from(m) {
                out.push((u64::from(m), n, alpha));
            }
            m += 1;
        }
    }
    out
}

/// `δ = sqrt(12 ln(k/α) / α)`, the smallest gap the overflow bound covers.
pub fn overflow_delta(k: u64, alpha: u64) -> f64 {
    (12.0 * (k as f64 / alpha as f64).ln() / alpha as f64).sqrt()
}

fn case_seed(seed: u64, index: usize) -> u64 {
    assoclab_core::cache::mix64(seed.wrapping_add(index as u64))
}

pub fn run_ballsbins_audit(grid: &BallsBinsGrid, seed: u64) -> Result<Vec<BallsBinsRow>, ExperimentError> {
    let mut rows = Vec::new();
    let trials = grid.trials;
    for &(m, n, alpha) in &grid.oracle_cases {
        let s = case_seed(seed, rows.len());
        let exact = exact_overflow_probability(m, n, alpha)?.to_f64().unwrap_or(f64::NAN);
        let (p, se) = mc_overflow_probability(&BallsBinsParams { m, n, trials, seed: s }, alpha)?;
        // The larger of the estimated and the exact-p standard error: the
        // former alone is 0 whenever no trial hits a rare event.
        let se_exact = (exact * (1.0 - exact) / trials as f64).sqrt();
        let tol = SIGMAS * se.max(se_exact);
        rows.push(BallsBinsRow {
            check: BallsBinsCheck::Oracle,
            m,
            n,
            alpha: Some(alpha),
            delta: None,
            epsilon: None,
            trials,
            seed: s,
            estimate: p,
            stderr: se,
            reference: exact,
            in_range: true,
            holds: (p - exact).abs() <= tol,
        });
    }
    let k = grid.overflow_k;
    for &alpha in &grid.overflow_alphas {
        let s = case_seed(seed, rows.len());
        let delta = overflow_delta(k, alpha);
        let m = ((1.0 - delta).max(0.0) * k as f64).ceil() as u64;
        let n = k / alpha;
        let (p, se) = mc_overflow_probability(&BallsBinsParams { m, n, trials, seed: s }, alpha)?;
        let bound = overflow_bound(delta, alpha);
        rows.push(BallsBinsRow {
            check: BallsBinsCheck::OverflowBound,
            m,
            n,
            alpha: Some(alpha),
            delta: Some(delta),
            epsilon: None,
            trials,
            seed: s,
            estimate: p,
            stderr: se,
            reference: bound,
            in_range: delta <= 0.5,
            holds: p - SIGMAS * se <= bound,
        });
    }
    for &n in &grid.saturation_ns {
        for &h in &grid.saturation_hs {
            for &eps in &grid.saturation_eps {
                let s = case_seed(seed, rows.len());
                let m = n * h;
                let st = mc_saturated_bins(&BallsBinsParams { m, n, trials, seed: s }, eps)?;
                let bound = saturation_bound(st.f_value);
                rows.push(BallsBinsRow {
                    check: BallsBinsCheck::SaturationBound,
                    m,
                    n,
                    alpha: None,
                    delta: None,
                    epsilon: Some(eps),
                    trials,
                    seed: s,
                    estimate: st.fraction_exceeding,
                    stderr: st.stderr,
                    reference: bound,
                    in_range: !st.out_of_range,
                    holds: st.fraction_exceeding >= bound - SIGMAS * st.stderr,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_case_grid() {
        let cases = oracle_cases(1_000_000);
        assert!(cases.contains(&(19, 2, 18)));
        assert!(!cases.iter().any(|&(m, _, _)| m == 20));
        assert!(cases.contains(&(6, 10, 1)));
        assert!(!cases.contains(&(7, 10, 1)));
        assert!(cases.iter().all(|&(m, n, a)| n.pow(m as u32) <= 1_000_000 && a < m));
    }

    #[test]
    fn small_grid_rows() {
        let grid = BallsBinsGrid {
            oracle_cases: vec![(4, 2, 2), (3, 3, 1)],
            overflow_k: 64,
            overflow_alphas: vec![16],
            saturation_ns: vec![8],
            saturation_hs: vec![4],
            saturation_eps: vec![0.5],
            trials: 2000,
        };
        let rows = run_ballsbins_audit(&grid, 3).unwrap();
        assert_eq!(rows.len(), 4);
        // 4 balls in 2 bins, some bin above 2: (2 + 8) / 16.
        assert_eq!(rows[0].reference, 10.0 / 16.0);
        // 3 balls in 3 bins, some bin above 1: 1 - 3!/27.
        assert!((rows[1].reference - 21.0 / 27.0).abs() < 1e-15);
        assert!(rows.iter().all(|r| r.holds), "{rows:?}");
        assert_eq!(rows, run_ballsbins_audit(&grid, 3).unwrap());
    }

    #[test]
    fn verdict_rows_flatten_witnesses() {
        let space = SearchSpace::new(3, 4, [2]);
        let audits = run_class_audits(&[PolicyKind::FlushWhenFull], &space).unwrap();
        let rows = verdict_rows(PolicyKind::FlushWhenFull, &audits[0].1);
        let lazy = &rows[0];
        assert_eq!(lazy.predicate, "LAZY");
        assert!(!lazy.pass);
        assert_eq!(lazy.witness_trace, "0 1 2");
        assert_eq!(lazy.witness_confirmed, Some(true));
        assert_eq!(rows[1].capacity, Some(2));
    }
}
