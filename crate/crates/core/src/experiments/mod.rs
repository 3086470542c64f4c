//! Reproducible Monte Carlo studies of percolation on Q^d.
//!
//! Each trial's randomness depends only on `(seed, trial)`, so rows are
//! identical no matter how many workers run or in what order.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, ExperimentKind, ReportFormat, CONFIG_KEYS};
pub use report::{
    aggregate_rows, parse_csv, round_sig, to_csv, to_json, write_report, Aggregate, Cell,
    ConfigEcho, ExperimentReport, TrialRow,
};
pub use run::{run, run_gw, run_hitprob, run_sprinkling, run_subcritical, run_supercritical};
