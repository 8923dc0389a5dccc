use assoclab_core::cache::HashIndexer;
use assoclab_core::ItemId;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson's statistic for `count` consecutive ids and its upper-tail p-value.
fn chi_square(seed: u64, buckets: usize, start: u64, count: u64) -> (f64, f64) {
    let h = HashIndexer::new(seed, buckets);
    let mut obs = vec![0u64; buckets];
    for i in start..start + count {
        obs[h.bucket(ItemId(i))] += 1;
    }
    let expected = count as f64 / buckets as f64;
    let stat: f64 = obs.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((buckets - 1) as f64).unwrap();
    (stat, dist.sf(stat))
}

#[test]
fn buckets_are_uniform_on_sequential_ids() {
    for seed in [1u64, 2, 3] {
        for buckets in [64usize, 256, 1000] {
            let (stat, p) = chi_square(seed, buckets, 0, 100_000);
            assert!(p >= 0.001, "seed {seed}, {buckets} buckets: chi2 = {stat}, p = {p}");
        }
    }
}

#[test]
fn buckets_are_uniform_on_sparse_ids() {
    for seed in [1u64, 2, 3] {
        let h = HashIndexer::new(seed, 128);
        let mut obs = vec![0u64; 128];
        for i in 0..100_000u64 {
            obs[h.bucket(ItemId(i << 20))] += 1;
        }
        let expected = 100_000.0 / 128.0;
        let stat: f64 = obs.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        let p = ChiSquared::new(127.0).unwrap().sf(stat);
        assert!(p >= 0.001, "seed {seed}: chi2 = {stat}, p = {p}");
    }
}

#[test]
fn seeds_decorrelate() {
    let (a, b) = (HashIndexer::new(1, 64), HashIndexer::new(2, 64));
    let same = (0..100_000u64).filter(|&i| a.bucket(ItemId(i)) == b.bucket(ItemId(i))).count();
    // Independent maps agree on about 1/64 of ids.
    let expected = 100_000.0 / 64.0;
    let sd = (100_000.0 * (1.0 / 64.0) * (63.0 / 64.0) as f64).sqrt();
    assert!((same as f64 - expected).abs() < 5.0 * sd, "{same}");
}
