//! Balls-and-bins quantities behind the bucket-overflow bounds.
//!
//! `m` balls land independently and uniformly in `n` bins; `h = m / n`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallsBinsError {
    #[error("need at least one bin")]
    NoBins,
    #[error("need at least one trial")]
    NoTrials,
    #[error("exact computation needs {work} steps, budget is {budget}")]
    BudgetExceeded { work: u128, budget: u128 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallsBinsParams {
    pub m: u64,
    pub n: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationStats {
    pub epsilon: f64,
    pub h: f64,
    pub f_value: f64,
    /// Per trial, the number of bins with load at least `h + εh`.
    pub saturated_counts: Vec<u64>,
    /// Fraction of trials with strictly more than `f_value / 8` saturated bins.
    pub fraction_exceeding: f64,
    pub stderr: f64,
    /// Set when `ε` lies outside `[0, n - 2]` or `n < 2`, where the lower
    /// bound makes no claim.
    pub out_of_range: bool,
}

/// `f(n, m, ε) = n exp(-2 ε² m / n)`.
pub fn f_bound(n: u64, m: u64, epsilon: f64) -> f64 {
    let h = m as f64 / n as f64;
    n as f64 * (-2.0 * epsilon * epsilon * h).exp()
}

/// Upper bound on the overflow probability for `(1 - δ)k` balls in `k / α` bins.
pub fn overflow_bound(delta: f64, alpha: u64) -> f64 {
    (-delta * delta * alpha as f64 / 12.0).exp()
}

/// Lower bound on the probability of more than `f / 8` saturated bins.
pub fn saturation_bound(f_value: f64) -> f64 {
    1.0 - (-f_value / 32.0).exp()
}

/// Work limit for [`exact_overflow_probability`], in big-integer multiply-adds.
pub const EXACT_BUDGET: u128 = 50_000_000;

/// Probability that some bin receives more than `alpha` balls, exactly.
///
/// Counts placements with every load at most `alpha` by dynamic programming
/// over bins: `ways[r]` is the number of ways to put `r` labeled balls into
/// the bins seen so far, and adding a bin with `j` balls multiplies by
/// `C(r + j, j)`.
pub fn exact_overflow_probability(m: u64, n: u64, alpha: u64) -> Result<BigRational, BallsBinsError> {
    if n == 0 {
        return Err(BallsBinsError::NoBins);
    }
    if m <= alpha {
        return Ok(BigRational::zero());
    }
    let work = n as u128 * (m as u128 + 1) * (alpha as u128 + 1);
    if work > EXACT_BUDGET {
        return Err(BallsBinsError::BudgetExceeded {
            work,
            budget: EXACT_BUDGET,
        });
    }
    let (m, alpha) = (m as usize, alpha as usize);
    let binom = binomials(m);
    let mut ways = vec![BigUint::zero(); m + 1];
    ways[0] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); m + 1];
        for (r, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for j in 0..=alpha.min(m - r) {
                next[r + j] += w * &binom[r + j][j];
            }
        }
        ways = next;
    }
    let total = BigUint::from(n).pow(m as u32);
    let ok = BigRational::new(ways[m].clone().into(), total.into());
    Ok(BigRational::one() - ok)
}

fn binomials(m: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mut row = vec![BigUint::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    rows
}

/// Trial `i` draws from its own ChaCha stream, so results do not depend on
/// how trials are scheduled.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn loads(rng: &mut ChaCha8Rng, m: u64, n: u64) -> Vec<u32> {
    let mut bins = vec![0u32; n as usize];
    for _ in 0..m {
        bins[rng.random_range(0..n) as usize] += 1;
    }
    bins
}

fn binomial_stderr(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Monte Carlo estimate of the probability that the maximum load exceeds
/// `alpha`, with its binomial standard error.
pub fn mc_overflow_probability(params: &BallsBinsParams, alpha: u64) -> Result<(f64, f64), BallsBinsError> {
    if params.n == 0 {
        return Err(BallsBinsError::NoBins);
    }
    if params.trials == 0 {
        return Err(BallsBinsError::NoTrials);
    }
    let hits: u64 = (0..params.trials)
        .into_par_iter()
        .map(|i| {
            if params.m <= alpha {
                return 0;
            }
            let mut rng = trial_rng(params.seed, i);
            let max = loads(&mut rng, params.m, params.n).into_iter().max().unwrap_or(0);
            u64::from(max as u64 > alpha)
        })
        .sum();
    let p = hits as f64 / params.trials as f64;
    Ok((p, binomial_stderr(p, params.trials)))
}

/// Counts `εh`-saturated bins per trial: bins with load `L` such that
/// `L ≥ h + εh`.
pub fn mc_saturated_bins(params: &BallsBinsParams, epsilon: f64) -> Result<SaturationStats, BallsBinsError> {
    if params.n == 0 {
        return Err(BallsBinsError::NoBins);
    }
    if params.trials == 0 {
        return Err(BallsBinsError::NoTrials);
    }
    let (m, n) = (params.m, params.n);
    let h = m as f64 / n as f64;
    // L ≥ h(1 + ε) rewritten as L·n ≥ m(1 + ε) to avoid dividing.
    let threshold = m as f64 * (1.0 + epsilon);
    let saturated_counts: Vec<u64> = (0..params.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(params.seed, i);
            loads(&mut rng, m, n)
                .into_iter()
                .filter(|&l| l as f64 * n as f64 >= threshold)
                .count() as u64
        })
        .collect();
    let f_value = f_bound(n, m, epsilon);
    let exceeding = saturated_counts.iter().filter(|&&c| c as f64 > f_value / 8.0).count();
    let fraction_exceeding = exceeding as f64 / params.trials as f64;
    Ok(SaturationStats {
        epsilon,
        h,
        f_value,
        saturated_counts,
        fraction_exceeding,
        stderr: binomial_stderr(fraction_exceeding, params.trials),
        out_of_range: n < 2 || !(0.0..=(n as f64 - 2.0)).contains(&epsilon),
    })
}
