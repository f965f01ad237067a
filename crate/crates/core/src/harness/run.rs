use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use super::holdout::{generate_holdout, holdout_eval, sample_valid_task, HoldoutError, HoldoutSpec};
use super::metrics::{batch_metrics, mean, MetricsRow, ProposalRecord, RunLog, StepRecord};
use crate::dsl::{self, GenSpec, GenerateError};
use crate::gate::{admit, exec_check, GateConfig};
use crate::kv::{Kv, KvError};
use crate::policy::{
    policy_update, proposer_sample, solver_sample, Episode, NonFiniteGradient, ParamsError, PolicySnapshot,
    ProposerParams, SolverParams,
};
use crate::pool::{eligibility, Pool, PoolError, Task};
use crate::rewards::{estimate_accuracy, grpo_advantages, proposer_reward, Reference, RewardKind, RolloutGroup};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Proposer,
    Solver,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("holdout: {0}")]
    Holdout(#[from] HoldoutError),
    #[error("seed pool: {0}")]
    Generate(#[from] GenerateError),
    #[error("pool: {0}")]
    Pool(#[from] PoolError),
    #[error("params: {0}")]
    Params(#[from] ParamsError),
    #[error("checkpoint state: {0}")]
    State(#[from] KvError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("step {step}: {role:?} update aborted: {source}")]
    NonFinite {
        step: u64,
        role: Role,
        source: NonFiniteGradient,
    },
    #[error("checkpoint at step {found} cannot resume a run of {steps} steps")]
    CheckpointBeyondEnd { found: u64, steps: u64 },
}

/// Everything that evolves during a run. The random streams are keyed by
/// step, so this plus the config fully determines the continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    /// Last completed step.
    pub step: u64,
    pub policy: PolicySnapshot,
    pub reference: PolicySnapshot,
    pub pool: Pool,
}

pub struct Runner {
    cfg: RunConfig,
    state: RunState,
    holdout: Vec<Task>,
    log: RunLog,
    pending_switch: Option<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn holdout_spec(cfg: &RunConfig) -> HoldoutSpec {
    HoldoutSpec {
        n: cfg.holdout_n,
        depth: cfg.holdout_depth,
        literal_range: cfg.task_literal_range,
        input_range: cfg.task_input_range,
        seed: cfg.holdout_seed,
    }
}

/// The initial pool: valid shallow tasks whose claim is the executor output.
pub fn seed_pool(cfg: &RunConfig) -> Result<Pool, RunError> {
    let mut pool = Pool::new(cfg.pool_cap)?;
    let (lo, hi) = cfg.task_literal_range;
    let gen = GenSpec::new(cfg.seed_pool_depth.0, cfg.seed_pool_depth.1, lo, hi);
    for i in 0..cfg.seed_pool_size as u64 {
        let mut rng = stream(cfg.seed, Purpose::SeedPool, 0, i);
        let (expr, input, output) = sample_valid_task(&mut rng, gen, cfg.task_input_range)?;
        pool.insert(Task {
            id: i,
            program_text: expr.render(),
            expr: Some(expr),
            input,
            claimed: Some(output.clone()),
            output: Some(output),
            exec: true,
            step: 0,
        })?;
    }
    pool.begin_step();
    Ok(pool)
}

impl Runner {
    /// Fresh run: seed pool, initial policies as the KL reference, and the
    /// step-0 holdout row.
    pub fn new(cfg: RunConfig) -> Result<Self, RunError> {
        cfg.validate()?;
        let policy = PolicySnapshot {
            proposer: ProposerParams::new(cfg.proposer_shape, &cfg.proposer_init),
            solver: SolverParams::new(cfg.solver_shape.clone(), &cfg.solver_init),
        };
        let state = RunState {
            step: 0,
            reference: policy.clone(),
            policy,
            pool: seed_pool(&cfg)?,
        };
        let mut runner = Runner::with_state(cfg, state)?;
        let row = runner.row(None, None, None, None, None);
        let rec = runner.record(row, Vec::new(), Vec::new(), None, None, None);
        runner.log.records.push(rec);
        Ok(runner)
    }

    /// Continues from `state` without emitting a step-0 row.
    pub fn with_state(cfg: RunConfig, state: RunState) -> Result<Self, RunError> {
        cfg.validate()?;
        if state.step > cfg.steps {
            return Err(RunError::CheckpointBeyondEnd {
                found: state.step,
                steps: cfg.steps,
            });
        }
        let holdout = generate_holdout(&holdout_spec(&cfg))?;
        Ok(Runner {
            log: RunLog {
                label: cfg.label.to_string(),
                records: Vec::new(),
            },
            cfg,
            state,
            holdout,
            pending_switch: None,
        })
    }

    pub fn resume(cfg: RunConfig, checkpoint: &Path) -> Result<Self, RunError> {
        let state = load_checkpoint(checkpoint, cfg.pool_cap)?;
        Runner::with_state(cfg, state)
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn into_log(self) -> RunLog {
        self.log
    }

    pub fn holdout(&self) -> &[Task] {
        &self.holdout
    }

    /// Changes ε for the remaining steps; the next record notes the switch.
    pub fn set_epsilon(&mut self, epsilon: f64) -> Result<(), RunError> {
        let previous = self.cfg.epsilon;
        self.cfg.epsilon = epsilon;
        self.cfg.validate()?;
        self.pending_switch = Some(previous);
        Ok(())
    }

    pub fn is_done(&self) -> bool {
        self.state.step >= self.cfg.steps
    }

    /// Runs until `last` (clamped to the configured number of steps).
    pub fn run_until(&mut self, last: u64) -> Result<(), RunError> {
        while self.state.step < last.min(self.cfg.steps) {
            self.step()?;
        }
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), RunError> {
        self.run_until(self.cfg.steps)
    }

    fn holdout_due(&self, step: u64) -> bool {
        step % self.cfg.holdout_every == 0 || step == self.cfg.steps
    }

    fn row(
        &self,
        grounded_acc: Option<f64>,
        intrinsic_mean: Option<f64>,
        gap: Option<f64>,
        eligibility: Option<f64>,
        proposer_reward: Option<f64>,
    ) -> MetricsRow {
        let step = self.state.step;
        let holdout_acc = self
            .holdout_due(step)
            .then(|| holdout_eval(&self.state.policy.solver, &self.holdout, self.cfg.seed, step));
        MetricsRow {
            step,
            grounded_acc,
            intrinsic_mean,
            gap,
            eligibility,
            pool_size: self.state.pool.len(),
            proposer_reward,
            holdout_acc,
            epsilon: self.cfg.epsilon,
        }
    }

    fn record(
        &mut self,
        metrics: MetricsRow,
        proposals: Vec<ProposalRecord>,
        batch: Vec<u64>,
        rollouts: Option<Vec<RolloutGroup>>,
        proposer_update: Option<crate::policy::UpdateStats>,
        solver_update: Option<crate::policy::UpdateStats>,
    ) -> StepRecord {
        StepRecord {
            label: self.log.label.clone(),
            metrics,
            switched_from: self.pending_switch.take(),
            proposals,
            batch,
            rollouts,
            proposer_update,
            solver_update,
        }
    }

    /// One outer step: the proposer phase, then the solver phase.
    pub fn step(&mut self) -> Result<(), RunError> {
        let t = self.state.step + 1;
        let cfg = &self.cfg;
        let gate = GateConfig::new(cfg.epsilon, cfg.gate_seed).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let reference = match cfg.label.proposer {
            RewardKind::Grounded => Reference::Executor,
            RewardKind::Intrinsic => Reference::Claimed,
        };

        // proposer phase
        let RunState {
            policy, pool, reference: anchor, ..
        } = &mut self.state;
        pool.begin_step();
        let mut proposals = Vec::with_capacity(cfg.proposer_batch);
        let mut traces = Vec::with_capacity(cfg.proposer_batch);
        for i in 0..cfg.proposer_batch as u64 {
            let cand = proposer_sample(&policy.proposer, &mut stream(cfg.seed, Purpose::Propose, t, i));
            let outcome = exec_check(&cand.program_text, cand.input);
            pool.record_proposal();
            let admitted = admit(&outcome, &gate, &mut stream(gate.seed, Purpose::Gate, t, i));
            let mut task_id = None;
            let mut reward = 0.0;
            if admitted {
                let id = pool.next_id();
                let task = Task {
                    id,
                    expr: dsl::parse(&cand.program_text).ok(),
                    program_text: cand.program_text.clone(),
                    input: cand.input,
                    output: outcome.output(),
                    claimed: Some(cand.claimed.clone()),
                    exec: outcome.exec(),
                    step: t,
                };
                let mut rng = stream(cfg.seed, Purpose::Estimate, t, i);
                let est = estimate_accuracy(&task, &policy.solver, reference, cfg.estimate_rollouts, &mut rng)
                    .expect("admitted tasks carry a claim");
                reward = proposer_reward(&est);
                pool.insert(task)?;
                task_id = Some(id);
            }
            proposals.push(ProposalRecord {
                program_text: cand.program_text,
                input: cand.input,
                claimed: cand.claimed,
                malformed: cand.malformed,
                exec: outcome.exec(),
                failure: outcome.failure(),
                admitted,
                task_id,
                reward,
            });
            traces.push(cand.trace.expect("sampled candidates carry a trace"));
        }
        let (rewards, traces): (Vec<f64>, Vec<_>) = proposals
            .iter()
            .zip(traces)
            .filter(|(p, _)| p.admitted || cfg.train_on_rejected)
            .map(|(p, trace)| (p.reward, trace))
            .unzip();
        let episodes: Vec<Episode> = traces
            .into_iter()
            .zip(grpo_advantages(&rewards))
            .map(|(trace, adv)| Episode::new(&policy.proposer, trace, adv))
            .collect();
        let proposer_stats = policy_update(
            &mut policy.proposer,
            &anchor.proposer,
            &episodes,
            &cfg.proposer_update(),
        )
        .map_err(|source| RunError::NonFinite {
            step: t,
            role: Role::Proposer,
            source,
        })?;
        let elig = eligibility(&pool.stats());

        // solver phase
        let batch: Vec<Task> = pool
            .sample_batch(cfg.solver_batch, &mut stream(cfg.seed, Purpose::PoolSample, t, 0))?
            .into_iter()
            .cloned()
            .collect();
        let solver = &policy.solver;
        let n = cfg.group_size as u64;
        let sampled: Vec<Vec<(String, crate::policy::Trace)>> = batch
            .par_iter()
            .enumerate()
            .map(|(j, task)| {
                (0..n)
                    .map(|k| solver_sample(solver, task, &mut stream(cfg.seed, Purpose::Rollout, t, j as u64 * n + k)))
                    .collect()
            })
            .collect();
        let mut groups = Vec::with_capacity(batch.len());
        let mut episodes = Vec::with_capacity(batch.len() * cfg.group_size);
        for (task, rollouts) in batch.iter().zip(sampled) {
            let (answers, traces): (Vec<String>, Vec<_>) = rollouts.into_iter().unzip();
            // every pooled task has an output or a claim
            let group = RolloutGroup::score(task, answers, cfg.label.solver).expect("pooled task has a reference");
            for (trace, &adv) in traces.into_iter().zip(&group.advantages) {
                episodes.push(Episode::new(solver, trace, adv));
            }
            groups.push(group);
        }
        let solver_stats = policy_update(
            &mut policy.solver,
            &anchor.solver,
            &episodes,
            &cfg.update,
        )
        .map_err(|source| RunError::NonFinite {
            step: t,
            role: Role::Solver,
            source,
        })?;

        self.state.step = t;
        let (grounded, intrinsic, gap) = batch_metrics(&groups);
        let row = self.row(grounded, intrinsic, gap, elig, mean(&rewards));
        let rollouts = self.cfg.record_rollouts.then_some(groups);
        let batch_ids = batch.iter().map(|t| t.id).collect();
        let rec = self.record(row, proposals, batch_ids, rollouts, Some(proposer_stats), Some(solver_stats));
        self.log.records.push(rec);
        Ok(())
    }

    /// Writes params, KL reference, pool and step counter into `dir`.
    pub fn checkpoint(&self, dir: &Path) -> Result<(), RunError> {
        save_checkpoint(&self.state, dir)
    }
}

pub fn save_checkpoint(state: &RunState, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    state.policy.save(&dir.join("params.toml"))?;
    state.reference.save(&dir.join("reference.toml"))?;
    state.pool.write_snapshot(&dir.join("pool.tsv"))?;
    let mut kv = Kv::default();
    kv.set("step", state.step as i64);
    let path = dir.join("state.toml");
    fs::write(&path, kv.render()).map_err(io_err(&path))
}

pub fn load_checkpoint(dir: &Path, pool_cap: usize) -> Result<RunState, RunError> {
    let path = dir.join("state.toml");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Ok(RunState {
        step: Kv::parse(&text)?.u64("step")?,
        policy: PolicySnapshot::load(&dir.join("params.toml"))?,
        reference: PolicySnapshot::load(&dir.join("reference.toml"))?,
        pool: Pool::read_snapshot(&dir.join("pool.tsv"), pool_cap)?,
    })
}

/// Runs `cfg` from scratch to completion.
pub fn run(cfg: &RunConfig) -> Result<RunLog, RunAbort> {
    let mut runner = Runner::new(cfg.clone()).map_err(|error| RunAbort {
        log: RunLog {
            label: cfg.label.to_string(),
            records: Vec::new(),
        },
        error,
    })?;
    match runner.run_to_end() {
        Ok(()) => Ok(runner.into_log()),
        Err(error) => Err(RunAbort {
            log: runner.into_log(),
            error,
        }),
    }
}

/// A failed run together with the steps it completed.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct RunAbort {
    pub log: RunLog,
    #[source]
    pub error: RunError,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Label;

    fn small(label: &str) -> RunConfig {
        let mut c = RunConfig::for_label(label.parse::<Label>().unwrap());
        c.steps = 12;
        c.holdout_n = 20;
        c.holdout_every = 5;
        c
    }

    #[test]
    fn zero_steps_gives_only_the_holdout_row() {
        let mut c = small("II+exec");
        c.steps = 0;
        let log = run(&c).unwrap();
        assert_eq!(log.records.len(), 1);
        let r = &log.records[0].metrics;
        assert_eq!(r.step, 0);
        assert!(r.holdout_acc.is_some());
        assert!(r.gap.is_none() && r.grounded_acc.is_none());
        assert_eq!(r.pool_size, 24);
    }

    #[test]
    fn replay_is_bit_identical() {
        let c = small("GI+off");
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 13);
        let holdout_steps: Vec<u64> = a.rows().filter(|r| r.holdout_acc.is_some()).map(|r| r.step).collect();
        assert_eq!(holdout_steps, vec![0, 5, 10, 12]);
    }

    #[test]
    fn exec_gate_admits_only_valid_tasks() {
        let log = run(&small("II+exec")).unwrap();
        for rec in &log.records[1..] {
            for p in &rec.proposals {
                assert_eq!(p.admitted, p.exec);
                if !p.admitted {
                    assert_eq!(p.reward, 0.0);
                }
            }
        }
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let c = small("II+off");
        let full = run(&c).unwrap();
        let mut first = Runner::new(c.clone()).unwrap();
        first.run_until(7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        first.checkpoint(dir.path()).unwrap();
        let mut second = Runner::resume(c, dir.path()).unwrap();
        second.run_to_end().unwrap();
        assert_eq!(&full.records[8..], &second.log().records[..]);
    }
}
