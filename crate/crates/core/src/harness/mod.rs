//! The outer training loop, metrics, logs, and the experiment drivers.

mod config;
mod emit;
mod experiments;
mod holdout;
mod metrics;
mod run;

pub use config::{parse_range, BadLabel, ConfigError, GateMode, Label, RunConfig};
pub use emit::{read_metrics_csv, write_jsonl, write_metrics_csv, write_phase_table, write_run, EmitError};
pub use experiments::{
    adaptive_schedule, late_stage, phase_table, run_matrix, sweep_epsilon, LateStage, PhaseRow, DEFAULT_GRID,
    LATE_FRACTION,
};
pub use holdout::{generate_holdout, holdout_eval, read_holdout, write_holdout, HoldoutError, HoldoutSpec};
pub use metrics::{batch_metrics, mean, median, MetricsRow, ProposalRecord, RunLog, StepRecord, CSV_HEADER};
pub use run::{holdout_spec, load_checkpoint, run, save_checkpoint, seed_pool, Role, RunAbort, RunError, RunState, Runner};
