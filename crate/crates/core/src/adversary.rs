//! Request sequence generators: the lower-bound adversary, the fixed-set
//! cycler used against non-rehashing caches, and a Zipf baseline workload.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::ItemId;
use crate::trace::Trace;

/// Generated traces longer than this are refused; use the iterators instead.
pub const MAX_MATERIALIZED_LEN: u128 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("parameter {name} = {value} does not fit in 64 bits")]
    Overflow { name: &'static str, value: f64 },
    #[error("universe starting at {start} cannot supply {needed} distinct items")]
    UniverseTooSmall { start: u64, needed: u128 },
    #[error("trace of {length} requests is too long to materialize")]
    TooLong { length: u128 },
    #[error("bad zipf parameters: {0}")]
    Zipf(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffAdversaryParams {
    pub k: usize,
    pub alpha: usize,
    pub delta: f64,
    pub c: f64,
    pub s_override: Option<u64>,
    pub t_override: Option<u64>,
}

/// Resolved sizes of one adversary instance, with the unscaled values for
/// reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryPlan {
    pub s: u64,
    pub t: u64,
    pub k_prime: u64,
    pub length: u128,
    pub theoretical_s: f64,
    pub theoretical_t: f64,
    /// `16 k exp(8 δ² α / (1 − δ))`, the universe size the lower bound assumes.
    pub theoretical_universe: f64,
    /// Whether the `s · k'` items actually used reach the theoretical universe.
    pub theoretical_universe_met: bool,
}

impl TradeoffAdversaryParams {
    pub fn new(k: usize, alpha: usize, delta: f64, c: f64) -> Self {
        Self {
            k,
            alpha,
            delta,
            c,
            s_override: None,
            t_override: None,
        }
    }

    pub fn with_overrides(mut self, s: Option<u64>, t: Option<u64>) -> Self {
        self.s_override = s;
        self.t_override = t;
        self
    }

    fn exponent(&self) -> f64 {
        8.0 * self.delta * self.delta * self.alpha as f64 / (1.0 - self.delta)
    }

    pub fn theoretical_s(&self) -> f64 {
        16.0 * self.exponent().exp()
    }

    pub fn theoretical_t(&self) -> f64 {
        self.c * self.alpha as f64 * self.theoretical_s().ceil().powi(2)
    }

    pub fn k_prime(&self) -> u64 {
        ((1.0 - self.delta) * self.k as f64).ceil() as u64
    }

    pub fn plan(&self) -> Result<AdversaryPlan, AdversaryError> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(AdversaryError::BadDelta(self.delta));
        }
        if self.k == 0 {
            return Err(AdversaryError::NonPositive("k"));
        }
        if self.alpha == 0 {
            return Err(AdversaryError::NonPositive("alpha"));
        }
        if !(self.c > 0.0) {
            return Err(AdversaryError::NonPositive("c"));
        }
        let to_u64 = |name, v: f64| {
            if v.is_finite() && v <= u64::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(AdversaryError::Overflow { name, value: v })
            }
        };
        let theoretical_s = self.theoretical_s();
        let theoretical_t = self.theoretical_t();
        let s = match self.s_override {
            Some(s) => s,
            None => to_u64("s", theoretical_s.ceil())?,
        };
        let t = match self.t_override {
            Some(t) => t,
            None => to_u64("t", (self.c * self.alpha as f64 * (s as f64).powi(2)).ceil())?,
        };
        if s == 0 {
            return Err(AdversaryError::NonPositive("s"));
        }
        if t == 0 {
            return Err(AdversaryError::NonPositive("t"));
        }
        let k_prime = self.k_prime();
        let theoretical_universe = self.k as f64 * theoretical_s;
        Ok(AdversaryPlan {
            s,
            t,
            k_prime,
            length: s as u128 * t as u128 * k_prime as u128,
            theoretical_s,
            theoretical_t,
            theoretical_universe,
            theoretical_universe_met: (s as u128 * k_prime as u128) as f64 >= theoretical_universe,
        })
    }
}

impl AdversaryPlan {
    pub fn distinct_items(&self) -> u128 {
        self.s as u128 * self.k_prime as u128
    }

    /// Lazily yields the adversary sequence.
    pub fn iter(&self, universe_start: ItemId) -> Result<impl Iterator<Item = ItemId>, AdversaryError> {
        let needed = self.distinct_items();
        if universe_start.0 as u128 + needed > u64::MAX as u128 + 1 {
            return Err(AdversaryError::UniverseTooSmall {
                start: universe_start.0,
                needed,
            });
        }
        let (t, kp, start) = (self.t, self.k_prime, universe_start.0);
        Ok((0..self.s).flat_map(move |i| {
            let base = start + i * kp;
            (0..t).flat_map(move |_| (base..=base + (kp - 1)).map(ItemId))
        }))
    }
}

/// `s` phases; phase `i` scans the block `S_i` of `k'` fresh items `t` times.
/// Blocks are consecutive id ranges starting at `universe_start`.
pub fn tradeoff_adversary(params: &TradeoffAdversaryParams, universe_start: ItemId) -> Result<Trace, AdversaryError> {
    let plan = params.plan()?;
    if plan.length > MAX_MATERIALIZED_LEN {
        return Err(AdversaryError::TooLong { length: plan.length });
    }
    Ok(plan.iter(universe_start)?.collect())
}

/// `k'` consecutive items from `universe_start`, scanned `repetitions` times.
pub fn fixed_set_cycler(k_prime: u64, repetitions: u64, universe_start: ItemId) -> Trace {
    fixed_set_cycler_iter(k_prime, repetitions, universe_start).collect()
}

pub fn fixed_set_cycler_iter(k_prime: u64, repetitions: u64, universe_start: ItemId) -> impl Iterator<Item = ItemId> {
    let start = universe_start.0;
    (0..repetitions).flat_map(move |_| (start..start + k_prime).map(ItemId))
}

/// I.i.d. Zipf draws over ids `0..universe_size`; id `r - 1` has rank `r`.
/// Exponent 0 gives uniform draws.
pub fn zipf_trace(universe_size: u64, exponent: f64, length: usize, seed: u64) -> Result<Trace, AdversaryError> {
    if universe_size == 0 {
        return Err(AdversaryError::NonPositive("universe_size"));
    }
    let dist = Zipf::new(universe_size as f64, exponent).map_err(|e| AdversaryError::Zipf(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..length)
        .map(|_| {
            let r = dist.sample(&mut rng) as u64;
            ItemId(r.clamp(1, universe_size) - 1)
        })
        .collect())
}
