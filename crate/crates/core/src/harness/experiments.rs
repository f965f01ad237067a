use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Label, RunConfig};
use super::metrics::{mean, RunLog};
use super::run::{run, RunAbort, Runner};

/// Leak rates of the phase sweep.
pub const DEFAULT_GRID: [f64; 7] = [0.0, 0.05, 0.1, 0.2, 0.4, 0.7, 1.0];

/// Fraction of the run, counted from the end, that late-stage means cover.
pub const LATE_FRACTION: f64 = 0.2;

/// Runs the seven labels of the comparison matrix on shared seeds. Runs are
/// independent; one failing does not stop the others.
pub fn run_matrix(base: &RunConfig) -> Vec<(Label, Result<RunLog, RunAbort>)> {
    Label::matrix()
        .into_par_iter()
        .map(|label| (label, run(&base.with_label(label))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LateStage {
    pub gap: Option<f64>,
    pub holdout_acc: Option<f64>,
    pub eligibility: Option<f64>,
}

/// Means over the final 20% of steps (at least one step). Holdout accuracy
/// averages whichever checkpoints fall in the window.
pub fn late_stage(log: &RunLog) -> LateStage {
    let last = log.last().map_or(0, |r| r.step);
    let window = ((last as f64 * LATE_FRACTION).ceil() as u64).max(1);
    let rows: Vec<_> = log.rows().filter(|r| r.step > last.saturating_sub(window)).collect();
    let pick = |f: fn(&super::metrics::MetricsRow) -> Option<f64>| {
        mean(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
    };
    LateStage {
        gap: pick(|r| r.gap),
        holdout_acc: pick(|r| r.holdout_acc),
        eligibility: pick(|r| r.eligibility),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub epsilon: f64,
    pub late_gap: Option<f64>,
    pub late_holdout_acc: Option<f64>,
    pub late_eligibility: Option<f64>,
    /// Youden index of the gate, `1 - ε`.
    pub youden_j: f64,
}

impl PhaseRow {
    pub fn from_log(epsilon: f64, log: &RunLog) -> Self {
        let late = late_stage(log);
        PhaseRow {
            epsilon,
            late_gap: late.gap,
            late_holdout_acc: late.holdout_acc,
            late_eligibility: late.eligibility,
            youden_j: 1.0 - epsilon,
        }
    }
}

/// One run per leak rate, all else equal.
pub fn sweep_epsilon(base: &RunConfig, grid: &[f64]) -> Vec<(f64, Result<RunLog, RunAbort>)> {
    grid.par_iter()
        .map(|&epsilon| {
            let cfg = RunConfig {
                epsilon,
                ..base.clone()
            };
            (epsilon, run(&cfg))
        })
        .collect()
}

/// Phase-table rows for the sweep runs that completed.
pub fn phase_table(results: &[(f64, Result<RunLog, RunAbort>)]) -> Vec<PhaseRow> {
    results
        .iter()
        .filter_map(|(eps, r)| r.as_ref().ok().map(|log| PhaseRow::from_log(*eps, log)))
        .collect()
}

/// Trains at ε = 0 up to `switch_step`, snapshots params and pool into
/// `checkpoint`, then resumes from the snapshot at `epsilon2`. The returned
/// log covers the whole run; the first post-switch record carries
/// `switched_from`.
pub fn adaptive_schedule(
    cfg: &RunConfig,
    switch_step: u64,
    epsilon2: f64,
    checkpoint: &Path,
) -> Result<RunLog, RunAbort> {
    let abort = |log: RunLog| move |error| RunAbort { log, error };
    let empty = || RunLog {
        label: cfg.label.to_string(),
        records: Vec::new(),
    };
    if switch_step == 0 {
        return run(&RunConfig {
            epsilon: epsilon2,
            ..cfg.clone()
        });
    }
    let base = RunConfig {
        epsilon: 0.0,
        ..cfg.clone()
    };
    let mut first = Runner::new(base.clone()).map_err(abort(empty()))?;
    if let Err(e) = first.run_until(switch_step) {
        return Err(abort(first.into_log())(e));
    }
    if let Err(e) = first.checkpoint(checkpoint) {
        return Err(abort(first.into_log())(e));
    }
    let mut log = first.into_log();
    let mut second = match Runner::resume(base, checkpoint) {
        Ok(r) => r,
        Err(e) => return Err(abort(log)(e)),
    };
    let result = second.set_epsilon(epsilon2).and_then(|()| second.run_to_end());
    log.records.extend(second.into_log().records);
    match result {
        Ok(()) => Ok(log),
        Err(e) => Err(abort(log)(e)),
    }
}
