//! Config-driven runs, history logs, metrics and log checking.

pub mod check;
pub mod config;
pub mod log;
pub mod metrics;
pub mod run;

pub use check::{check_invariants, replay, InvariantReport, Violation};
pub use config::{load_config, load_config_str, ModelKind, RunConfig};
pub use log::{HistoryLog, Snapshot, StepRecord};
pub use metrics::{gini, MetricsReport};
pub use run::{prepare, run_history};
