use serde::{Deserialize, Serialize};

use crate::gate::FailureReason;
use crate::policy::UpdateStats;
use crate::rewards::RolloutGroup;

/// One line of the metrics CSV. Fields that do not apply to a step (the
/// step-0 row, holdout between checkpoints, a batch without gradable
/// tasks) are `None` and written as empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    pub grounded_acc: Option<f64>,
    pub intrinsic_mean: Option<f64>,
    pub gap: Option<f64>,
    pub eligibility: Option<f64>,
    pub pool_size: usize,
    pub proposer_reward: Option<f64>,
    pub holdout_acc: Option<f64>,
    pub epsilon: f64,
}

pub const CSV_HEADER: &str =
    "step,grounded_acc,intrinsic_mean,gap,eligibility,pool_size,proposer_reward,holdout_acc,epsilon";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalRecord {
    pub program_text: String,
    pub input: (i64, i64),
    pub claimed: String,
    pub malformed: bool,
    pub exec: bool,
    pub failure: Option<FailureReason>,
    pub admitted: bool,
    pub task_id: Option<u64>,
    pub reward: f64,
}

/// Raw per-step record behind one JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub label: String,
    #[serde(flatten)]
    pub metrics: MetricsRow,
    /// Set on the first step run after a schedule switch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switched_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub proposals: Vec<ProposalRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub batch: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rollouts: Option<Vec<RolloutGroup>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposer_update: Option<UpdateStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_update: Option<UpdateStats>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub label: String,
    pub records: Vec<StepRecord>,
}

impl RunLog {
    pub fn rows(&self) -> impl Iterator<Item = &MetricsRow> {
        self.records.iter().map(|r| &r.metrics)
    }

    pub fn last(&self) -> Option<&MetricsRow> {
        self.records.last().map(|r| &r.metrics)
    }

    /// Holdout accuracy at the last step that evaluated it.
    pub fn final_holdout(&self) -> Option<f64> {
        self.rows().filter_map(|r| r.holdout_acc).last()
    }

    /// Largest per-step gap.
    pub fn max_gap(&self) -> Option<f64> {
        self.rows().filter_map(|r| r.gap).reduce(f64::max)
    }

    /// First step whose gap reaches `threshold`.
    pub fn first_step_gap_at_least(&self, threshold: f64) -> Option<u64> {
        self.rows().find(|r| r.gap.is_some_and(|g| g >= threshold)).map(|r| r.step)
    }
}

/// Per-step summary of the scored rollout groups: grounded accuracy and
/// gap average over tasks with an executor output, intrinsic mean over all
/// tasks; each is a mean of per-task means.
pub fn batch_metrics(groups: &[RolloutGroup]) -> (Option<f64>, Option<f64>, Option<f64>) {
    let grounded: Vec<f64> = groups.iter().filter_map(RolloutGroup::grounded_mean).collect();
    let intrinsic: Vec<f64> = groups.iter().map(RolloutGroup::intrinsic_mean).collect();
    let gaps: Vec<f64> = groups.iter().filter_map(RolloutGroup::gap).collect();
    (mean(&grounded), mean(&intrinsic), mean(&gaps))
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}
