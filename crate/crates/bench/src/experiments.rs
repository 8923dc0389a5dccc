//! The threshold sweep and the rehashing long run.

use assoclab_core::adversary::{fixed_set_cycler_iter, zipf_trace, TradeoffAdversaryParams};
use assoclab_core::cache::{mix64, run_pair, PairRunReport, PairRunner, RehashMode, SetAssocCache};
use assoclab_core::{ItemId, Trace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, TraceSource};
use crate::trace_io::load_trace;
use crate::ExperimentError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: usize,
    pub delta: f64,
    pub k_prime: usize,
    pub misses_sa: u64,
    pub misses_fa: u64,
    pub bad_evictions: u64,
    pub flush_evictions: u64,
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongRunRow {
    pub mode: RehashMode,
    pub seed: u64,
    pub repetitions: u64,
    pub alpha: usize,
    pub k_prime: usize,
    pub misses_sa: u64,
    pub misses_fa: u64,
    pub bad_evictions: u64,
    pub flush_evictions: u64,
    pub ratio: f64,
}

/// `misses_sa / misses_fa`, with 1 for a trace neither cache missed on.
pub fn miss_ratio(misses_sa: u64, misses_fa: u64) -> f64 {
    if misses_fa == 0 {
        if misses_sa == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        misses_sa as f64 / misses_fa as f64
    }
}

/// Seed of the Zipf filler for a given experiment seed, kept apart from the
/// stream that drives the cache's hash functions.
fn filler_seed(seed: u64) -> u64 {
    mix64(seed ^ 0x5a17_f111_e4c0_ffee)
}

/// The request sequence one sweep row replays.
pub fn build_trace(cfg: &ExperimentConfig, alpha: usize, seed: u64) -> Result<Trace, ExperimentError> {
    let k_prime = cfg.k_prime_for(alpha) as u64;
    let trace = match &cfg.trace_source {
        TraceSource::Adversary {
            s,
            t,
            filler_exponent,
            filler_universe,
        } => {
            let params = TradeoffAdversaryParams::new(cfg.k, alpha, cfg.delta_for(alpha), cfg.c).with_overrides(*s, *t);
            let plan = params.plan()?;
            if plan.k_prime != k_prime {
                return Err(ExperimentError::TraceMismatch(format!(
                    "adversary k' = {} but reference k' = {k_prime}",
                    plan.k_prime
                )));
            }
            let universe = filler_universe.unwrap_or(cfg.k as u64);
            let start = if filler_exponent.is_some() { universe } else { 0 };
            let adversary = assoclab_core::adversary::tradeoff_adversary(&params, ItemId(start))?;
            match filler_exponent {
                None => adversary,
                Some(exponent) => {
                    let filler = zipf_trace(universe, *exponent, adversary.len(), filler_seed(seed))?;
                    let phase = (plan.t * plan.k_prime) as usize;
                    let mut out = Trace::with_capacity(2 * adversary.len());
                    for (a, f) in adversary.as_slice().chunks(phase).zip(filler.as_slice().chunks(phase)) {
                        out.extend(a.iter().copied());
                        out.extend(f.iter().copied());
                    }
                    out
                }
            }
        }
        TraceSource::Cycler {
            k_prime: kp,
            repetitions,
        } => fixed_set_cycler_iter(kp.unwrap_or(k_prime), *repetitions, ItemId(0)).collect(),
        TraceSource::Zipf {
            universe,
            exponent,
            length,
        } => zipf_trace(*universe, *exponent, *length, filler_seed(seed))?,
        TraceSource::File { path, format } => load_trace(path, *format)?,
    };
    if trace.is_empty() {
        return Err(ExperimentError::TraceMismatch("trace source produced no requests".into()));
    }
    Ok(trace)
}

fn units(cfg: &ExperimentConfig) -> Vec<(usize, u64)> {
    let mut alphas = cfg.alpha_grid.clone();
    alphas.sort_unstable();
    alphas.dedup();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();
    alphas.iter().flat_map(|&a| seeds.iter().map(move |&s| (a, s))).collect()
}

/// Sweep rows together with the full pair report of each run.
pub fn run_threshold_sweep_detailed(cfg: &ExperimentConfig) -> Result<Vec<(SweepRow, PairRunReport)>, ExperimentError> {
    cfg.validate()?;
    units(cfg)
        .into_par_iter()
        .map(|(alpha, seed)| {
            let trace = build_trace(cfg, alpha, seed)?;
            let k_prime = cfg.k_prime_for(alpha);
            let sa = SetAssocCache::new(cfg.k, alpha, cfg.kind, seed, cfg.rehash.to_config(cfg.k))?;
            let rep = run_pair(&trace, sa, cfg.kind, k_prime)?;
            let row = SweepRow {
                alpha,
                delta: cfg.delta_for(alpha),
                k_prime,
                misses_sa: rep.misses_test,
                misses_fa: rep.misses_ref,
                bad_evictions: rep.bad_evictions,
                flush_evictions: rep.flush_evictions,
                ratio: miss_ratio(rep.misses_test, rep.misses_ref),
                seed,
            };
            Ok((row, rep))
        })
        .collect()
}

/// One row per `(α, seed)`, sorted by `(α, seed)`.
pub fn run_threshold_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, ExperimentError> {
    Ok(run_threshold_sweep_detailed(cfg)?.into_iter().map(|(r, _)| r).collect())
}

/// Full pair-run ledger for one `(α, seed)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRunRow {
    pub alpha: usize,
    pub seed: u64,
    pub k_prime: usize,
    pub requests: u64,
    pub misses_sa: u64,
    pub misses_fa: u64,
    pub bad_evictions: u64,
    pub flush_evictions: u64,
    pub bad_flush_evictions: u64,
    /// Prefixes on which `misses_sa > misses_fa + B + F_bad`.
    pub ledger_violations: u64,
    /// `misses_fa + B + F_bad - misses_sa` at the end of the trace.
    pub slack: i64,
}

pub fn run_pair_experiment(cfg: &ExperimentConfig) -> Result<Vec<PairRunRow>, ExperimentError> {
    Ok(run_threshold_sweep_detailed(cfg)?
        .into_iter()
        .map(|(row, rep)| PairRunRow {
            alpha: row.alpha,
            seed: row.seed,
            k_prime: row.k_prime,
            requests: rep.requests,
            misses_sa: rep.misses_test,
            misses_fa: rep.misses_ref,
            bad_evictions: rep.bad_evictions,
            flush_evictions: rep.flush_evictions,
            bad_flush_evictions: rep.bad_flush_evictions,
            ledger_violations: rep.ledger_violations,
            slack: rep.slack() as i64,
        })
        .collect())
}

/// Repetition counts at which long-run rows are taken: powers of two up to
/// `repetitions`, plus `repetitions` itself.
pub fn checkpoints(repetitions: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (0..64).map(|i| 1u64 << i).take_while(|&p| p <= repetitions).collect();
    if out.last() != Some(&repetitions) && repetitions > 0 {
        out.push(repetitions);
    }
    out
}

/// Final pair report per `(mode, α, seed)` of a long run.
pub type LongRunReports = Vec<((RehashMode, usize, u64), PairRunReport)>;

/// Runs the cycler through a non-rehashing control and every configured
/// rehash mode. Rows are sorted by `(α, mode, seed, repetitions)` with the
/// control first.
pub fn run_rehash_longrun_detailed(cfg: &ExperimentConfig) -> Result<(Vec<LongRunRow>, LongRunReports), ExperimentError> {
    cfg.validate()?;
    if cfg.rehash.mode == RehashMode::None {
        return Err(ExperimentError::Config("the long run needs a rehash mode other than NONE".into()));
    }
    let TraceSource::Cycler { k_prime: kp, repetitions } = cfg.trace_source else {
        return Err(ExperimentError::Config("the long run replays a cycler trace source".into()));
    };
    let mut modes = vec![RehashMode::None, cfg.rehash.mode];
    for &m in &cfg.also_modes {
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    let work = units_with_modes(cfg, &modes);
    let marks = checkpoints(repetitions);

    let results: Vec<Result<(Vec<LongRunRow>, PairRunReport), ExperimentError>> = work
        .par_iter()
        .map(|&(alpha, mode, seed)| {
            let k_prime = cfg.k_prime_for(alpha);
            let items = kp.unwrap_or(k_prime as u64);
            let mut spec = cfg.rehash;
            spec.mode = mode;
            let sa = SetAssocCache::new(cfg.k, alpha, cfg.kind, seed, spec.to_config(cfg.k))?;
            let mut runner = PairRunner::new(sa, cfg.kind, k_prime)?;
            let mut rows = Vec::with_capacity(marks.len());
            let mut done = 0u64;
            for &mark in &marks {
                for x in fixed_set_cycler_iter(items, mark - done, ItemId(0)) {
                    runner.step(x);
                }
                done = mark;
                let rep = runner.report();
                rows.push(LongRunRow {
                    mode,
                    seed,
                    repetitions: mark,
                    alpha,
                    k_prime,
                    misses_sa: rep.misses_test,
                    misses_fa: rep.misses_ref,
                    bad_evictions: rep.bad_evictions,
                    flush_evictions: rep.flush_evictions,
                    ratio: miss_ratio(rep.misses_test, rep.misses_ref),
                });
            }
            Ok((rows, runner.into_report()))
        })
        .collect();

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (r, &(alpha, mode, seed)) in results.into_iter().zip(&work) {
        let (rs, rep) = r?;
        rows.extend(rs);
        reports.push(((mode, alpha, seed), rep));
    }
    let rank = |m: RehashMode| modes.iter().position(|&x| x == m).unwrap();
    rows.sort_by_key(|r| (r.alpha, rank(r.mode), r.seed, r.repetitions));
    Ok((rows, reports))
}

fn units_with_modes(cfg: &ExperimentConfig, modes: &[RehashMode]) -> Vec<(usize, RehashMode, u64)> {
    units(cfg)
        .into_iter()
        .flat_map(|(a, s)| modes.iter().map(move |&m| (a, m, s)))
        .collect()
}

pub fn run_rehash_longrun(cfg: &ExperimentConfig) -> Result<Vec<LongRunRow>, ExperimentError> {
    Ok(run_rehash_longrun_detailed(cfg)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DeltaSpec, RehashSpec};

    fn small_sweep() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default_sweep();
        cfg.k = 64;
        cfg.alpha_grid = vec![64, 2, 8];
        cfg.seeds = vec![3, 1];
        cfg.trace_source = TraceSource::Adversary {
            s: Some(4),
            t: Some(3),
            filler_exponent: Some(1.0),
            filler_universe: None,
        };
        cfg
    }

    #[test]
    fn checkpoint_schedule() {
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(8), vec![1, 2, 4, 8]);
        assert_eq!(checkpoints(10), vec![1, 2, 4, 8, 10]);
    }

    #[test]
    fn mixed_trace_layout() {
        let cfg = small_sweep();
        let t = build_trace(&cfg, 2, 1).unwrap();
        // k' = 32, 4 phases of 3 scans, each followed by as many filler requests.
        assert_eq!(t.len(), 2 * 4 * 3 * 32);
        let phase = &t.as_slice()[..96];
        assert!(phase.iter().all(|x| (64..96).contains(&x.0)));
        let filler = &t.as_slice()[96..192];
        assert!(filler.iter().all(|x| x.0 < 64));
        assert_eq!(t, build_trace(&cfg, 2, 1).unwrap());
        assert_ne!(t, build_trace(&cfg, 2, 2).unwrap());
    }

    #[test]
    fn sweep_rows_are_sorted_and_ledgered() {
        let cfg = small_sweep();
        let out = run_threshold_sweep_detailed(&cfg).unwrap();
        let keys: Vec<_> = out.iter().map(|(r, _)| (r.alpha, r.seed)).collect();
        assert_eq!(keys, vec![(2, 1), (2, 3), (8, 1), (8, 3), (64, 1), (64, 3)]);
        for (row, rep) in &out {
            assert_eq!(rep.ledger_violations, 0);
            assert!(row.misses_sa <= row.misses_fa + row.bad_evictions + row.flush_evictions);
            assert!(row.k_prime <= cfg.k);
        }
        // One bucket of k slots against LRU on k/2 slots: inclusion.
        for (row, _) in out.iter().filter(|(r, _)| r.alpha == 64) {
            assert!(row.ratio <= 1.0);
        }
    }

    #[test]
    fn longrun_rows() {
        let mut cfg = ExperimentConfig::default_longrun();
        cfg.k = 64;
        cfg.alpha_grid = vec![4];
        cfg.delta = DeltaSpec::Fixed(0.25);
        cfg.seeds = vec![1, 2];
        cfg.rehash = RehashSpec {
            mode: RehashMode::FullFlush,
            threshold: 200,
        };
        cfg.trace_source = TraceSource::Cycler {
            k_prime: None,
            repetitions: 40,
        };
        let (rows, reports) = run_rehash_longrun_detailed(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 2 * checkpoints(40).len());
        assert_eq!(rows[0].mode, RehashMode::None);
        assert!(rows.iter().all(|r| r.k_prime == 48 && r.misses_fa == 48));
        assert!(reports.iter().all(|(_, r)| r.ledger_violations == 0 && r.requests == 40 * 48));
        let mut cfg2 = cfg.clone();
        cfg2.rehash.mode = RehashMode::None;
        assert!(run_rehash_longrun(&cfg2).is_err());
    }
}
