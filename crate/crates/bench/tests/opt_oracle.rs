use assoclab_bench::compute_opt_cost;
use assoclab_core::policy::miss_count;
use assoclab_core::{PolicyKind, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Fewest misses over every demand-paging schedule, by memoized search over
/// (position, resident set). Items must be below 8.
fn brute_force_opt(trace: &[u64], k: usize) -> u64 {
    fn go(trace: &[u64], k: usize, i: usize, cache: u8, memo: &mut [[Option<u64>; 256]]) -> u64 {
        if i == trace.len() {
            return 0;
        }
        if let Some(v) = memo[i][cache as usize] {
            return v;
        }
        let bit = 1u8 << trace[i];
        let v = if cache & bit != 0 {
            go(trace, k, i + 1, cache, memo)
        } else if (cache.count_ones() as usize) < k {
            1 + go(trace, k, i + 1, cache | bit, memo)
        } else {
            (0..8)
                .filter(|j| cache >> j & 1 == 1)
                .map(|j| 1 + go(trace, k, i + 1, (cache & !(1 << j)) | bit, memo))
                .min()
                .unwrap()
        };
        memo[i][cache as usize] = Some(v);
        v
    }
    let mut memo = vec![[None; 256]; trace.len()];
    go(trace, k, 0, 0, &mut memo)
}

fn decode(mut code: u64, len: usize, base: u64) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = code % base;
            code /= base;
            d
        })
        .collect()
}

#[test]
fn oracle_agrees_with_hand_values() {
    assert_eq!(brute_force_opt(&[0, 1, 2, 3, 0, 1, 2, 3], 3), 5);
    assert_eq!(brute_force_opt(&[0, 1, 0, 1], 1), 4);
    assert_eq!(brute_force_opt(&[], 2), 0);
}

#[test]
fn matches_exhaustive_search_on_all_small_traces() {
    for len in 0..=10usize {
        let mismatches: Vec<(Vec<u64>, usize, u64, u64)> = (0..4u64.pow(len as u32))
            .into_par_iter()
            .flat_map_iter(|code| {
                let t = decode(code, len, 4);
                let trace = Trace::from(t.clone());
                (1..=3usize).filter_map(move |k| {
                    let fast = compute_opt_cost(&trace, k);
                    let slow = brute_force_opt(&t, k);
                    (fast != slow).then(|| (t.clone(), k, fast, slow))
                })
            })
            .collect();
        assert!(mismatches.is_empty(), "length {len}: {:?}", &mismatches[..mismatches.len().min(5)]);
    }
}

#[test]
fn never_worse_than_lru() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b7);
    for _ in 0..1000 {
        let universe = rng.random_range(2..40u64);
        let len = rng.random_range(0..600usize);
        let k = rng.random_range(1..12usize);
        let trace: Trace = (0..len).map(|_| rng.random_range(0..universe)).collect::<Vec<_>>().into();
        let opt = compute_opt_cost(&trace, k);
        let lru = miss_count(PolicyKind::Lru, k, &trace).unwrap();
        assert!(opt <= lru, "k = {k}: OPT {opt} > LRU {lru} on {trace:?}");
    }
}

#[test]
fn no_pressure_means_compulsory_misses_only() {
    let trace: Trace = vec![4u64, 9, 4, 4, 2, 9, 2].into();
    assert_eq!(compute_opt_cost(&trace, 3), 3);
    assert_eq!(compute_opt_cost(&trace, 10), 3);
}
