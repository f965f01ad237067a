//! Solver rewards (grounded and intrinsic), proposer rewards, and GRPO
//! group-normalized advantages.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{canonicalize_answer, CanonicalAnswer};
use crate::policy::{solver_sample, SolverParams};
use crate::pool::Task;

/// Stabilizer added to the group standard deviation.
pub const ADVANTAGE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("task {0} carries no reference answer")]
pub struct MissingGold(pub u64);

/// Which signal a role is trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    Grounded,
    Intrinsic,
}

impl RewardKind {
    pub fn letter(self) -> char {
        match self {
            RewardKind::Grounded => 'G',
            RewardKind::Intrinsic => 'I',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'G' => Some(RewardKind::Grounded),
            'I' => Some(RewardKind::Intrinsic),
            _ => None,
        }
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardKind::Grounded => "grounded",
            RewardKind::Intrinsic => "intrinsic",
        })
    }
}

/// Reference used when estimating solver accuracy on a proposed task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// The pool gold: `o*`, or the claim for a leaked task.
    Executor,
    /// The proposer's claim, always.
    Claimed,
}

fn matches(answer: &CanonicalAnswer, gold: &CanonicalAnswer) -> bool {
    matches!((answer, gold), (CanonicalAnswer::Integer(a), CanonicalAnswer::Integer(g)) if a == g)
}

/// 1 iff both sides canonicalize to the same integer.
pub fn grounded_reward(answer: &str, gold: &str) -> f64 {
    f64::from(u8::from(matches(
        &canonicalize_answer(answer),
        &canonicalize_answer(gold),
    )))
}

/// Agreement share of each answer within its group, self-inclusive.
pub fn intrinsic_rewards<S: AsRef<str>>(answers: &[S]) -> Vec<f64> {
    let canon: Vec<CanonicalAnswer> = answers.iter().map(|a| canonicalize_answer(a.as_ref())).collect();
    intrinsic_from_canonical(&canon)
}

fn intrinsic_from_canonical(canon: &[CanonicalAnswer]) -> Vec<f64> {
    let mut counts: HashMap<&CanonicalAnswer, usize> = HashMap::new();
    for c in canon {
        *counts.entry(c).or_default() += 1;
    }
    let n = canon.len() as f64;
    canon.iter().map(|c| counts[c] as f64 / n).collect()
}

/// `(r - mean) / (std + δ)` with population std; an all-equal group maps to
/// zeros.
pub fn grpo_advantages(rewards: &[f64]) -> Vec<f64> {
    if rewards.is_empty() {
        return Vec::new();
    }
    let first = rewards[0];
    if rewards.iter().all(|&r| r == first) {
        return vec![0.0; rewards.len()];
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let denom = var.sqrt() + ADVANTAGE_EPS;
    rewards.iter().map(|r| (r - mean) / denom).collect()
}

/// Mean intrinsic reward minus mean grounded reward of a group, or `None`
/// when there is no executor output to ground against.
pub fn intrinsic_grounded_gap<S: AsRef<str>>(answers: &[S], executor_output: Option<&str>) -> Option<f64> {
    let gold = executor_output?;
    if answers.is_empty() {
        return None;
    }
    let n = answers.len() as f64;
    let intrinsic = intrinsic_rewards(answers).iter().sum::<f64>() / n;
    let grounded = answers.iter().map(|a| grounded_reward(a.as_ref(), gold)).sum::<f64>() / n;
    Some(intrinsic - grounded)
}

/// One task's group of solver answers with their rewards and advantages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub task_id: u64,
    pub answers: Vec<String>,
    pub canonical: Vec<String>,
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
    /// Grounded correctness against `o*`, when the task has one.
    pub grounded: Option<Vec<f64>>,
    pub intrinsic: Vec<f64>,
}

impl RolloutGroup {
    /// Scores a group under `kind`. Grounded scoring uses the task's gold
    /// (executor output, or the claim for leaked tasks).
    pub fn score(task: &Task, answers: Vec<String>, kind: RewardKind) -> Result<Self, MissingGold> {
        let canon: Vec<CanonicalAnswer> = answers.iter().map(|a| canonicalize_answer(a)).collect();
        let intrinsic = intrinsic_from_canonical(&canon);
        let grounded = task.output.as_deref().map(|o| {
            let gold = canonicalize_answer(o);
            canon.iter().map(|c| f64::from(u8::from(matches(c, &gold)))).collect::<Vec<_>>()
        });
        let rewards = match kind {
            RewardKind::Intrinsic => intrinsic.clone(),
            RewardKind::Grounded => {
                let gold = canonicalize_answer(task.gold().ok_or(MissingGold(task.id))?);
                canon.iter().map(|c| f64::from(u8::from(matches(c, &gold)))).collect()
            }
        };
        let advantages = grpo_advantages(&rewards);
        Ok(RolloutGroup {
            task_id: task.id,
            canonical: canon.iter().map(ToString::to_string).collect(),
            answers,
            rewards,
            advantages,
            grounded,
            intrinsic,
        })
    }

    pub fn intrinsic_mean(&self) -> f64 {
        mean(&self.intrinsic)
    }

    pub fn grounded_mean(&self) -> Option<f64> {
        self.grounded.as_deref().map(mean)
    }

    pub fn gap(&self) -> Option<f64> {
        self.grounded_mean().map(|g| self.intrinsic_mean() - g)
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEstimate {
    pub alpha: f64,
    pub correct: usize,
    pub rollouts: usize,
    pub reference: Reference,
}

/// Empirical solver accuracy on `task` from `n_s` fresh rollouts, scored
/// against the executor output or the proposer's claim.
pub fn estimate_accuracy<R: Rng + ?Sized>(
    task: &Task,
    solver: &SolverParams,
    reference: Reference,
    n_s: usize,
    rng: &mut R,
) -> Result<AccuracyEstimate, MissingGold> {
    let gold = match reference {
        Reference::Executor => task.gold(),
        Reference::Claimed => task.claimed.as_deref(),
    }
    .ok_or(MissingGold(task.id))?;
    let gold = canonicalize_answer(gold);
    let correct = (0..n_s)
        .filter(|_| {
            let (answer, _) = solver_sample(solver, task, rng);
            matches(&canonicalize_answer(&answer), &gold)
        })
        .count();
    Ok(AccuracyEstimate {
        alpha: if n_s == 0 { 0.0 } else { correct as f64 / n_s as f64 },
        correct,
        rollouts: n_s,
        reference,
    })
}

pub fn proposer_reward(est: &AccuracyEstimate) -> f64 {
    1.0 - est.alpha
}
