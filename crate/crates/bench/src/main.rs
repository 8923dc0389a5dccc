use std::path::{Path, PathBuf};
use std::process::ExitCode;

use assoclab_bench::audits::{
    default_audit_kinds, run_ballsbins_audit, run_class_audits, verdict_rows, BallsBinsGrid,
};
use assoclab_bench::experiments::{build_trace, run_pair_experiment};
use assoclab_bench::report::ReportRow;
use assoclab_bench::trace_io::write_trace;
use assoclab_bench::{
    emit_report, run_rehash_longrun, run_threshold_sweep, save_trace, ExperimentConfig, ExperimentError,
    OutputFormat, ReportMeta, TraceFormat,
};
use assoclab_core::lab::SearchSpace;
use assoclab_core::PolicyKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "assoclab", version, about = "Set-associative paging experiments")]
struct Cli {
    /// Experiment config (TOML). Each subcommand has a built-in default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run with this single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent and the config names none.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Set-associative vs fully associative miss ratios over the α grid.
    Sweep,
    /// Fixed-set cycling with and without rehashing.
    Rehash,
    /// Decide class membership by exhaustive search.
    AuditClasses {
        #[arg(long, default_value_t = 4)]
        universe: u64,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        capacities: Vec<usize>,
        /// Policies to audit; all kinds when absent.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<PolicyKind>,
    },
    /// Monte Carlo against exact overflow probabilities and the tail bounds.
    AuditBallsbins {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Full pair-run ledger for each (α, seed).
    PairRun,
    /// Write the configured trace for one α and seed.
    GenTrace {
        #[arg(long)]
        alpha: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        trace_format: TraceFormat,
    },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn fail(kind: &str, message: String) -> ExitCode {
    let report = ErrorReport { error: kind, message };
    eprintln!("{}", serde_json::to_string(&report).expect("plain strings"));
    ExitCode::from(2)
}

fn load_config(cli: &Cli, default: fn() -> ExperimentConfig) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| ExperimentError::Io {
                path: p.display().to_string(),
                source,
            })?;
            ExperimentConfig::from_toml(&text)?
        }
        None => default(),
    };
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    Ok(cfg)
}

fn emit<R: ReportRow>(cli: &Cli, rows: &[R], meta: &ReportMeta, cfg_out: Option<&Path>) -> Result<(), ExperimentError> {
    let path = cli.out.as_deref().or(cfg_out);
    emit_report(rows, meta, path, cli.format)
}

#[derive(Serialize)]
struct AuditArgs<'a> {
    universe: u64,
    max_len: usize,
    capacities: &'a [usize],
    kinds: Vec<String>,
}

fn run(cli: &Cli) -> Result<(), ExperimentError> {
    match &cli.cmd {
        Cmd::Sweep => {
            let cfg = load_config(cli, ExperimentConfig::default_sweep)?;
            let rows = run_threshold_sweep(&cfg)?;
            emit(cli, &rows, &ReportMeta::new(&cfg, cfg.seeds.clone()), cfg.output.as_deref())
        }
        Cmd::Rehash => {
            let cfg = load_config(cli, ExperimentConfig::default_longrun)?;
            let rows = run_rehash_longrun(&cfg)?;
            emit(cli, &rows, &ReportMeta::new(&cfg, cfg.seeds.clone()), cfg.output.as_deref())
        }
        Cmd::PairRun => {
            let cfg = load_config(cli, ExperimentConfig::default_sweep)?;
            let rows = run_pair_experiment(&cfg)?;
            emit(cli, &rows, &ReportMeta::new(&cfg, cfg.seeds.clone()), cfg.output.as_deref())
        }
        Cmd::AuditClasses {
            universe,
            max_len,
            capacities,
            kinds,
        } => {
            let kinds = if kinds.is_empty() { default_audit_kinds() } else { kinds.clone() };
            let space = SearchSpace::new(*universe, *max_len, capacities.iter().copied());
            let mut rows = Vec::new();
            for (kind, audit) in run_class_audits(&kinds, &space)? {
                let broken = audit.hierarchy_violations();
                if !broken.is_empty() {
                    eprintln!("{kind}: hierarchy violations: {}", broken.join("; "));
                }
                rows.extend(verdict_rows(kind, &audit));
            }
            let args = AuditArgs {
                universe: *universe,
                max_len: *max_len,
                capacities,
                kinds: kinds.iter().map(|k| k.to_string()).collect(),
            };
            emit(cli, &rows, &ReportMeta::new(&args, Vec::new()), None)
        }
        Cmd::AuditBallsbins { trials } => {
            let seed = cli.seed.unwrap_or(1);
            let grid = BallsBinsGrid {
                trials: *trials,
                ..BallsBinsGrid::default()
            };
            if grid.trials == 0 {
                return Err(ExperimentError::Config("trials must be positive".into()));
            }
            let rows = run_ballsbins_audit(&grid, seed)?;
            emit(cli, &rows, &ReportMeta::new(&grid, vec![seed]), None)
        }
        Cmd::GenTrace { alpha, trace_format } => {
            let cfg = load_config(cli, ExperimentConfig::default_sweep)?;
            let alpha = alpha.unwrap_or(cfg.alpha_grid[0]);
            if alpha == 0 || cfg.k % alpha != 0 {
                return Err(ExperimentError::NotDivisible { k: cfg.k, alpha });
            }
            let seed = cfg.seeds[0];
            let trace = build_trace(&cfg, alpha, seed)?;
            match cli.out.as_deref().or(cfg.output.as_deref()) {
                Some(p) => Ok(save_trace(p, &trace, *trace_format)?),
                None => write_trace(std::io::stdout().lock(), &trace, *trace_format).map_err(|source| {
                    ExperimentError::Io {
                        path: "<stdout>".into(),
                        source,
                    }
                }),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end().to_string()),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
