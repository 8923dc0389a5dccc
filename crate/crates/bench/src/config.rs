//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment = "THRESHOLD-SWEEP"
//! k = 4096
//! alpha_grid = [2, 512]
//! delta = "AUTO"          # or a number in (0, 1)
//! c = 1.0
//! kind = "LRU"
//! seeds = [1, 2, 3]
//! output = "results/sweep.csv"
//!
//! [rehash]
//! mode = "NONE"           # NONE | FULL-FLUSH | INCREMENTAL
//! threshold = 0           # 0 selects k^2
//!
//! [trace_source]
//! generator = "adversary" # adversary | cycler | zipf | file
//! s = 32
//! t = 4
//! filler_exponent = 1.0
//! ```

use std::fmt;
use std::path::PathBuf;

use assoclab_core::cache::{RehashConfig, RehashMode};
use assoclab_core::PolicyKind;
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::trace_io::TraceFormat;
use crate::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Experiment {
    ThresholdSweep,
    RehashLongrun,
    ClassAudit,
    BallsbinsAudit,
    PairRun,
}

/// Capacity gap between the set-associative cache and its reference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaSpec {
    /// `min(sqrt(24 c ln k / α), 1/2)`, recomputed for each α.
    Auto,
    Fixed(f64),
}

impl DeltaSpec {
    pub fn resolve(self, k: usize, alpha: usize, c: f64) -> f64 {
        match self {
            DeltaSpec::Auto => (24.0 * c * (k as f64).ln() / alpha as f64).sqrt().min(0.5),
            DeltaSpec::Fixed(d) => d,
        }
    }
}

impl Serialize for DeltaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DeltaSpec::Auto => s.serialize_str("AUTO"),
            DeltaSpec::Fixed(d) => s.serialize_f64(*d),
        }
    }
}

impl<'de> Deserialize<'de> for DeltaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = DeltaSpec;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"AUTO\" or a number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<DeltaSpec, E> {
                if v.eq_ignore_ascii_case("auto") {
                    Ok(DeltaSpec::Auto)
                } else {
                    v.parse().map(DeltaSpec::Fixed).map_err(E::custom)
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<DeltaSpec, E> {
                Ok(DeltaSpec::Fixed(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<DeltaSpec, E> {
                Ok(DeltaSpec::Fixed(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<DeltaSpec, E> {
                Ok(DeltaSpec::Fixed(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RehashSpec {
    pub mode: RehashMode,
    /// Demand misses between rehashes; 0 selects `k^2`.
    #[serde(default)]
    pub threshold: u64,
}

impl RehashSpec {
    pub fn none() -> Self {
        Self {
            mode: RehashMode::None,
            threshold: 0,
        }
    }

    pub fn to_config(self, k: usize) -> RehashConfig {
        let threshold = if self.threshold == 0 {
            RehashConfig::default_threshold(k)
        } else {
            self.threshold
        };
        match self.mode {
            RehashMode::None => RehashConfig::none(),
            RehashMode::FullFlush => RehashConfig::full_flush(threshold),
            RehashMode::Incremental => RehashConfig::incremental(threshold),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TraceSource {
    /// Lower-bound adversary for the row's `k'`. With `filler_exponent` set,
    /// each phase is followed by an equally long block of Zipf requests over
    /// `filler_universe` (default `k`) ids disjoint from the adversary's.
    Adversary {
        s: Option<u64>,
        t: Option<u64>,
        filler_exponent: Option<f64>,
        filler_universe: Option<u64>,
    },
    /// `k_prime` items (default: the row's `k'`) scanned `repetitions` times.
    Cycler { k_prime: Option<u64>, repetitions: u64 },
    Zipf { universe: u64, exponent: f64, length: usize },
    File { path: PathBuf, format: TraceFormat },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub k: usize,
    pub alpha_grid: Vec<usize>,
    pub delta: DeltaSpec,
    #[serde(default = "one")]
    pub c: f64,
    pub kind: PolicyKind,
    #[serde(default = "RehashSpec::none")]
    pub rehash: RehashSpec,
    /// Further modes run beside `rehash.mode` in the long-run experiment,
    /// with the same threshold.
    #[serde(default)]
    pub also_modes: Vec<RehashMode>,
    pub trace_source: TraceSource,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.k == 0 {
            return Err(ExperimentError::Config("k must be positive".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(ExperimentError::Config("alpha_grid is empty".into()));
        }
        for &alpha in &self.alpha_grid {
            if alpha == 0 || self.k % alpha != 0 {
                return Err(ExperimentError::NotDivisible { k: self.k, alpha });
            }
        }
        if let DeltaSpec::Fixed(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(ExperimentError::Config(format!("delta must lie in (0, 1), got {d}")));
            }
        }
        if !(self.c > 0.0) {
            return Err(ExperimentError::Config("c must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(ExperimentError::Config("seeds is empty".into()));
        }
        Ok(())
    }

    pub fn delta_for(&self, alpha: usize) -> f64 {
        self.delta.resolve(self.k, alpha, self.c)
    }

    /// Reference capacity `ceil((1 - δ) k)`, at least 1.
    pub fn k_prime_for(&self, alpha: usize) -> usize {
        k_prime(self.k, self.delta_for(alpha))
    }

    /// The sweep used for the threshold experiment: LRU, `k = 4096`, adversary
    /// with `s = 32`, `t = 4` and Zipf(1) filler, ten seeds.
    pub fn default_sweep() -> Self {
        Self {
            experiment: Experiment::ThresholdSweep,
            k: 4096,
            alpha_grid: vec![2, 512],
            delta: DeltaSpec::Auto,
            c: 1.0,
            kind: PolicyKind::Lru,
            rehash: RehashSpec::none(),
            also_modes: Vec::new(),
            trace_source: TraceSource::Adversary {
                s: Some(32),
                t: Some(4),
                filler_exponent: Some(1.0),
                filler_universe: None,
            },
            seeds: (1..=10).collect(),
            output: None,
        }
    }

    /// The rehashing experiment: `k = 1024`, `α = 16`, `k' = 896`, cycler
    /// with `2^14` repetitions, full flushing every `k^2` misses, incremental
    /// alongside.
    pub fn default_longrun() -> Self {
        Self {
            experiment: Experiment::RehashLongrun,
            k: 1024,
            alpha_grid: vec![16],
            delta: DeltaSpec::Fixed(0.125),
            c: 1.0,
            kind: PolicyKind::Lru,
            rehash: RehashSpec {
                mode: RehashMode::FullFlush,
                threshold: 0,
            },
            also_modes: vec![RehashMode::Incremental],
            trace_source: TraceSource::Cycler {
                k_prime: None,
                repetitions: 1 << 14,
            },
            seeds: (1..=10).collect(),
            output: None,
        }
    }
}

pub fn k_prime(k: usize, delta: f64) -> usize {
    (((1.0 - delta) * k as f64).ceil() as usize).clamp(1, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_delta() {
        // sqrt(24 ln 4096 / 512) = 0.624..., capped.
        assert_eq!(DeltaSpec::Auto.resolve(4096, 512, 1.0), 0.5);
        assert_eq!(DeltaSpec::Auto.resolve(4096, 2, 1.0), 0.5);
        let d = DeltaSpec::Auto.resolve(4096, 4096, 1.0);
        assert!((d - (24.0 * 4096f64.ln() / 4096.0).sqrt()).abs() < 1e-15);
        assert_eq!(k_prime(4096, 0.5), 2048);
        assert_eq!(k_prime(1024, 0.125), 896);
    }

    #[test]
    fn toml_round_trip() {
        for cfg in [ExperimentConfig::default_sweep(), ExperimentConfig::default_longrun()] {
            let text = cfg.to_toml();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn parses_documented_form() {
        let text = r#"
            experiment = "THRESHOLD-SWEEP"
            k = 64
            alpha_grid = [2, 8]
            delta = "AUTO"
            kind = "LRU-2"
            seeds = [1]
            [rehash]
            mode = "FULL-FLUSH"
            threshold = 100
            [trace_source]
            generator = "zipf"
            universe = 100
            exponent = 0.9
            length = 1000
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.kind, PolicyKind::LruK(2));
        assert_eq!(cfg.c, 1.0);
        assert_eq!(cfg.rehash.to_config(64), RehashConfig::full_flush(100));
        let fixed = text.replace("\"AUTO\"", "0.25");
        assert_eq!(ExperimentConfig::from_toml(&fixed).unwrap().delta, DeltaSpec::Fixed(0.25));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::default_sweep();
        cfg.alpha_grid = vec![3];
        assert!(matches!(cfg.validate(), Err(ExperimentError::NotDivisible { .. })));
        let mut cfg = ExperimentConfig::default_sweep();
        cfg.delta = DeltaSpec::Fixed(1.5);
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_toml("k = 3").is_err());
    }
}
