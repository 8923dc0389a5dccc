//! CSV and JSON result files.
//!
//! CSV files carry one fixed header per row type and are written even when
//! there are no rows. JSON files are `{"meta": {...}, "rows": [...]}`. Floats
//! are written in shortest round-trip form in both.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::experiments::{LongRunRow, PairRunRow, SweepRow};
use crate::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A row type with a documented CSV header. Field order must match.
pub trait ReportRow: Serialize {
    const HEADER: &'static [&'static str];
}

impl ReportRow for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "alpha",
        "delta",
        "k_prime",
        "misses_sa",
        "misses_fa",
        "bad_evictions",
        "flush_evictions",
        "ratio",
        "seed",
    ];
}

impl ReportRow for LongRunRow {
    const HEADER: &'static [&'static str] = &[
        "mode",
        "seed",
        "repetitions",
        "alpha",
        "k_prime",
        "misses_sa",
        "misses_fa",
        "bad_evictions",
        "flush_evictions",
        "ratio",
    ];
}

impl ReportRow for PairRunRow {
    const HEADER: &'static [&'static str] = &[
        "alpha",
        "seed",
        "k_prime",
        "requests",
        "misses_sa",
        "misses_fa",
        "bad_evictions",
        "flush_evictions",
        "bad_flush_evictions",
        "ledger_violations",
        "slack",
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub assoclab: String,
    pub report_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            assoclab: env!("CARGO_PKG_VERSION").to_string(),
            report_format: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    /// The exact configuration that produced the rows.
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub versions: Versions,
}

impl ReportMeta {
    pub fn new<C: Serialize>(config: &C, seeds: Vec<u64>) -> Self {
        Self {
            config: serde_json::to_value(config).expect("configs serialize"),
            seeds,
            versions: Versions::default(),
        }
    }
}

pub fn render_csv<R: ReportRow>(rows: &[R]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(R::HEADER).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("rows serialize to flat records");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn render_json<R: Serialize>(rows: &[R], meta: &ReportMeta) -> Vec<u8> {
    #[derive(Serialize)]
    struct Doc<'a, R> {
        meta: &'a ReportMeta,
        rows: &'a [R],
    }
    let mut out = serde_json::to_vec_pretty(&Doc { meta, rows }).expect("rows serialize");
    out.push(b'\n');
    out
}

pub fn render<R: ReportRow>(rows: &[R], meta: &ReportMeta, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Json => render_json(rows, meta),
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report<R: ReportRow>(
    rows: &[R],
    meta: &ReportMeta,
    path: Option<&Path>,
    format: OutputFormat,
) -> Result<(), ExperimentError> {
    let bytes = render(rows, meta, format);
    match path {
        Some(p) => {
            let io_err = |source| ExperimentError::Io {
                path: p.display().to_string(),
                source,
            };
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err)?;
            }
            fs::write(p, bytes).map_err(io_err)
        }
        None => io::stdout().write_all(&bytes).map_err(|source| ExperimentError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(ratio: f64) -> SweepRow {
        SweepRow {
            alpha: 2,
            delta: 0.1,
            k_prime: 3,
            misses_sa: 10,
            misses_fa: 3,
            bad_evictions: 4,
            flush_evictions: 0,
            ratio,
            seed: 7,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let out = render_csv::<SweepRow>(&[]);
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "alpha,delta,k_prime,misses_sa,misses_fa,bad_evictions,flush_evictions,ratio,seed\n"
        );
        let out = render_csv::<LongRunRow>(&[]);
        assert!(String::from_utf8(out).unwrap().starts_with("mode,seed,repetitions,"));
    }

    #[test]
    fn floats_round_trip() {
        let r = 10.0 / 3.0;
        let text = String::from_utf8(render_csv(&[row(r)])).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, format!("2,0.1,3,10,3,4,0,{r},7"));
        let field: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        assert_eq!(field, r);
    }

    #[test]
    fn json_echoes_config() {
        let cfg = crate::ExperimentConfig::default_sweep();
        let meta = ReportMeta::new(&cfg, cfg.seeds.clone());
        let bytes = render_json(&[row(1.5)], &meta);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let back: crate::ExperimentConfig = serde_json::from_value(v["meta"]["config"].clone()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(v["rows"][0]["ratio"], 1.5);
        assert_eq!(v["meta"]["seeds"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn header_matches_field_order() {
        let v = serde_json::to_value(row(1.0)).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        let mut sorted_header = SweepRow::HEADER.to_vec();
        sorted_header.sort_unstable();
        let mut sorted_keys = keys.clone();
        sorted_keys.sort_unstable();
        assert_eq!(sorted_keys, sorted_header);
    }
}
