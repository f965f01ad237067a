//! The data gate: a deterministic execution check plus a Bernoulli(ε) leak
//! for tasks that fail it.

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{self, EvalResult, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureReason {
    Parse,
    Probe,
    Runtime,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::Parse => "parse",
            FailureReason::Probe => "probe",
            FailureReason::Runtime => "runtime",
        })
    }
}

/// Outcome of the execution check. `exec = 1` exactly when `output` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecOutcome {
    Valid { output: BigInt },
    Failed(FailureReason),
}

impl ExecOutcome {
    pub fn exec(&self) -> bool {
        matches!(self, ExecOutcome::Valid { .. })
    }

    /// Rendered executor output `o*`.
    pub fn output(&self) -> Option<String> {
        match self {
            ExecOutcome::Valid { output } => Some(output.to_string()),
            ExecOutcome::Failed(_) => None,
        }
    }

    pub fn failure(&self) -> Option<FailureReason> {
        match self {
            ExecOutcome::Valid { .. } => None,
            ExecOutcome::Failed(r) => Some(*r),
        }
    }

    pub fn parsed(&self) -> bool {
        self.failure() != Some(FailureReason::Parse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("gate epsilon must lie in [0, 1], got {0}")]
pub struct InvalidEpsilon(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    epsilon: f64,
    pub seed: u64,
}

impl GateConfig {
    pub fn new(epsilon: f64, seed: u64) -> Result<Self, InvalidEpsilon> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(InvalidEpsilon(epsilon));
        }
        Ok(GateConfig { epsilon, seed })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Youden's index of the gate viewed as a classifier: TPR is 1 and the
    /// false-positive rate is ε.
    pub fn youden_index(&self) -> f64 {
        1.0 - self.epsilon
    }
}

/// Execution check for an already-parsed program. Evaluation is run twice
/// and the two results must agree; for this interpreter they always do.
pub fn exec_check_expr(expr: &Expr, input: (i64, i64)) -> ExecOutcome {
    if !dsl::probe_validate(expr) {
        return ExecOutcome::Failed(FailureReason::Probe);
    }
    let first = dsl::evaluate_i64(expr, input.0, input.1);
    let second = dsl::evaluate_i64(expr, input.0, input.1);
    match (first, second) {
        (EvalResult::Value(a), EvalResult::Value(b)) if a == b => ExecOutcome::Valid { output: a },
        _ => ExecOutcome::Failed(FailureReason::Runtime),
    }
}

pub fn exec_check(program_text: &str, input: (i64, i64)) -> ExecOutcome {
    match dsl::parse(program_text) {
        Ok(e) => exec_check_expr(&e, input),
        Err(_) => ExecOutcome::Failed(FailureReason::Parse),
    }
}

/// Gate decision. Valid tasks are always admitted without touching `rng`;
/// failed-but-parseable tasks are admitted by one Bernoulli(ε) draw.
/// Unparseable text is never admitted: there is no question to pose.
pub fn admit<R: Rng + ?Sized>(outcome: &ExecOutcome, cfg: &GateConfig, rng: &mut R) -> bool {
    match outcome {
        ExecOutcome::Valid { .. } => true,
        ExecOutcome::Failed(FailureReason::Parse) => false,
        ExecOutcome::Failed(_) => rng.gen::<f64>() < cfg.epsilon,
    }
}
