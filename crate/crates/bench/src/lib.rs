//! Experiment harness for set-associative paging: offline OPT, trace files,
//! TOML experiment configs, the threshold sweep, the rehashing long run,
//! class and balls-and-bins audits, and CSV/JSON reports.

pub mod audits;
pub mod config;
pub mod experiments;
pub mod opt;
pub mod report;
pub mod stats;
pub mod trace_io;

use thiserror::Error;

pub use config::{DeltaSpec, ExperimentConfig, RehashSpec, TraceSource};
pub use experiments::{run_rehash_longrun, run_threshold_sweep, LongRunRow, SweepRow};
pub use opt::compute_opt_cost;
pub use report::{emit_report, OutputFormat, ReportMeta};
pub use trace_io::{load_trace, save_trace, TraceFormat};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("alpha = {alpha} does not divide k = {k}")]
    NotDivisible { k: usize, alpha: usize },
    #[error("trace mismatch: {0}")]
    TraceMismatch(String),
    #[error(transparent)]
    Cache(#[from] assoclab_core::cache::CacheError),
    #[error(transparent)]
    Policy(#[from] assoclab_core::policy::PolicyError),
    #[error(transparent)]
    Adversary(#[from] assoclab_core::adversary::AdversaryError),
    #[error(transparent)]
    Lab(#[from] assoclab_core::lab::LabError),
    #[error(transparent)]
    BallsBins(#[from] assoclab_core::ballsbins::BallsBinsError),
    #[error(transparent)]
    TraceIo(#[from] trace_io::TraceIoError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ExperimentError {
    /// Stable machine-readable tag for error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::NotDivisible { .. } => "not-divisible",
            ExperimentError::TraceMismatch(_) => "trace-mismatch",
            ExperimentError::Cache(_) => "cache",
            ExperimentError::Policy(_) => "policy",
            ExperimentError::Adversary(_) => "adversary",
            ExperimentError::Lab(_) => "class-audit",
            ExperimentError::BallsBins(_) => "balls-and-bins",
            ExperimentError::TraceIo(_) => "trace-io",
            ExperimentError::Io { .. } => "io",
        }
    }
}
