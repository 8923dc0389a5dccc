//! Miss ratio against associativity on a reduced grid.

use assoclab_bench::config::TraceSource;
use assoclab_bench::run_threshold_sweep;
use assoclab_bench::stats::kendall_tau;
use assoclab_bench::ExperimentConfig;

#[test]
fn ratio_falls_as_associativity_grows() {
    let mut cfg = ExperimentConfig::default_sweep();
    cfg.k = 512;
    cfg.alpha_grid = (0..=9).map(|i| 1usize << i).collect();
    cfg.seeds = (1..=5).collect();
    cfg.trace_source = TraceSource::Adversary {
        s: Some(16),
        t: Some(4),
        filler_exponent: Some(1.0),
        filler_universe: None,
    };
    let rows = run_threshold_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 50);
    let x: Vec<f64> = rows.iter().map(|r| r.alpha as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let kt = kendall_tau(&x, &y).unwrap();
    assert!(kt.tau < 0.0 && kt.p_decreasing < 0.05, "{kt:?}");
    for r in rows.iter().filter(|r| r.alpha == cfg.k) {
        assert!(r.ratio <= 1.0, "{r:?}");
    }
}
