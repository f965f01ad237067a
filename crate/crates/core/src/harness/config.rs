use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kv::{Kv, KvError};
use crate::policy::{ProposerInit, ProposerShape, SolverInit, SolverShape, UpdateConfig};
use crate::rewards::RewardKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateMode {
    /// Execution-gated: ε = 0.
    Exec,
    /// Ungated: ε = 1.
    Off,
}

impl GateMode {
    pub fn epsilon(self) -> f64 {
        match self {
            GateMode::Exec => 0.0,
            GateMode::Off => 1.0,
        }
    }
}

/// A configuration label `PS+gate`: proposer reward, solver reward, gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Label {
    pub proposer: RewardKind,
    pub solver: RewardKind,
    pub gate: GateMode,
}

impl Label {
    pub const fn new(proposer: RewardKind, solver: RewardKind, gate: GateMode) -> Self {
        Label { proposer, solver, gate }
    }

    /// The seven configurations of the comparison matrix.
    pub fn matrix() -> [Label; 7] {
        use GateMode::*;
        use RewardKind::*;
        [
            Label::new(Grounded, Grounded, Exec),
            Label::new(Grounded, Intrinsic, Exec),
            Label::new(Intrinsic, Intrinsic, Exec),
            Label::new(Grounded, Grounded, Off),
            Label::new(Intrinsic, Grounded, Off),
            Label::new(Grounded, Intrinsic, Off),
            Label::new(Intrinsic, Intrinsic, Off),
        ]
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gate = match self.gate {
            GateMode::Exec => "exec",
            GateMode::Off => "off",
        };
        write!(f, "{}{}+{gate}", self.proposer.letter(), self.solver.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad label `{0}`: expected PS+exec or PS+off with P, S in {{G, I}}")]
pub struct BadLabel(pub String);

impl FromStr for Label {
    type Err = BadLabel;

    fn from_str(s: &str) -> Result<Self, BadLabel> {
        let bad = || BadLabel(s.to_string());
        let (roles, gate) = s.split_once('+').ok_or_else(bad)?;
        let mut chars = roles.chars();
        let (Some(p), Some(q), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(bad());
        };
        let proposer = RewardKind::from_letter(p).ok_or_else(bad)?;
        let solver = RewardKind::from_letter(q).ok_or_else(bad)?;
        let gate = match gate {
            "exec" => GateMode::Exec,
            "off" => GateMode::Off,
            _ => return Err(bad()),
        };
        Ok(Label { proposer, solver, gate })
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error(transparent)]
    Label(#[from] BadLabel),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Everything a run depends on. A run is a pure function of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub label: Label,
    /// Leak rate in effect; defaults from the label's gate mode.
    pub epsilon: f64,
    pub steps: u64,
    pub seed: u64,
    pub gate_seed: u64,
    pub holdout_seed: u64,
    /// Proposals per step (`b_P`).
    pub proposer_batch: usize,
    /// Pool tasks per solver step (`b_S`).
    pub solver_batch: usize,
    /// Solver rollouts per task (`n`).
    pub group_size: usize,
    /// Rollouts behind each proposer accuracy estimate (`n_S`).
    pub estimate_rollouts: usize,
    pub pool_cap: usize,
    pub seed_pool_size: usize,
    pub seed_pool_depth: (usize, usize),
    pub task_literal_range: (i64, i64),
    pub task_input_range: (i64, i64),
    pub update: UpdateConfig,
    /// Proposer learning rate; `update.lr` applies to the solver.
    pub proposer_lr: f64,
    /// Whether proposals the gate turned away enter the proposer update with
    /// reward 0. Off, they carry no gradient.
    pub train_on_rejected: bool,
    pub holdout_n: usize,
    pub holdout_depth: (usize, usize),
    pub holdout_every: u64,
    /// Record every rollout group in the JSONL log.
    pub record_rollouts: bool,
    pub proposer_shape: ProposerShape,
    pub proposer_init: ProposerInit,
    pub solver_shape: SolverShape,
    pub solver_init: SolverInit,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::for_label(Label::new(RewardKind::Intrinsic, RewardKind::Intrinsic, GateMode::Off))
    }
}

const KEYS: &[&str] = &[
    "label",
    "gate.epsilon",
    "steps",
    "seed",
    "gate.seed",
    "holdout_seed",
    "proposer_batch",
    "solver_batch",
    "group_size",
    "estimate_rollouts",
    "pool_cap",
    "seed_pool_size",
    "seed_pool_depth",
    "task_literal_range",
    "task_input_range",
    "lr",
    "proposer_lr",
    "train_on_rejected",
    "clip",
    "kl_coef",
    "holdout_n",
    "holdout_depth",
    "holdout_every",
    "record_rollouts",
    "out",
    "proposer.max_depth",
    "proposer.literal_range",
    "proposer.input_range",
    "proposer.productions",
    "proposer.malformed",
    "proposer.fidelity",
    "solver.constants",
    "solver.depth_buckets",
    "solver.garbage_range",
    "solver.eval",
    "solver.noise",
];

/// Parses `"lo:hi"`.
pub fn parse_range<T: FromStr>(s: &str) -> Option<(T, T)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn range<T: FromStr>(kv: &Kv, key: &str) -> Result<Option<(T, T)>, ConfigError> {
    if kv.get(key).is_none() {
        return Ok(None);
    }
    let s = kv.str(key)?;
    parse_range(s)
        .map(Some)
        .ok_or_else(|| ConfigError::Invalid(format!("`{key}` must look like \"lo:hi\", got `{s}`")))
}

impl RunConfig {
    pub fn for_label(label: Label) -> Self {
        RunConfig {
            label,
            epsilon: label.gate.epsilon(),
            steps: 500,
            seed: 0,
            gate_seed: 1,
            holdout_seed: 2,
            proposer_batch: 8,
            solver_batch: 8,
            group_size: 16,
            estimate_rollouts: 8,
            pool_cap: crate::pool::DEFAULT_CAPACITY,
            seed_pool_size: 24,
            seed_pool_depth: (1, 3),
            task_literal_range: (-10, 10),
            task_input_range: (-10, 10),
            update: UpdateConfig::default(),
            proposer_lr: 0.4,
            train_on_rejected: false,
            holdout_n: 150,
            holdout_depth: (4, 6),
            holdout_every: 100,
            record_rollouts: false,
            // proposer inputs on the probe grid, so a failed probe can also
            // fail at the posed input
            proposer_shape: ProposerShape {
                input_lo: -2,
                input_hi: 2,
                ..ProposerShape::default()
            },
            // claims start out almost always faithful
            proposer_init: ProposerInit {
                fidelity: 4.0,
                ..ProposerInit::default()
            },
            solver_shape: SolverShape {
                depth_buckets: 7,
                ..SolverShape::default()
            },
            solver_init: SolverInit {
                eval: 0.5,
                ..SolverInit::default()
            },
            out: None,
        }
    }

    /// Same settings under a different label; ε follows the new label.
    pub fn with_label(&self, label: Label) -> Self {
        RunConfig {
            label,
            epsilon: label.gate.epsilon(),
            ..self.clone()
        }
    }

    pub fn proposer_update(&self) -> UpdateConfig {
        UpdateConfig {
            lr: self.proposer_lr,
            ..self.update
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("gate.epsilon must lie in [0, 1]");
        }
        if self.proposer_batch == 0 || self.solver_batch == 0 || self.group_size == 0 {
            return bad("batch and group sizes must be positive");
        }
        if self.pool_cap == 0 || self.seed_pool_size == 0 {
            return bad("pool capacity and seed pool size must be positive");
        }
        if self.holdout_every == 0 {
            return bad("holdout_every must be positive");
        }
        for (lo, hi) in [self.task_literal_range, self.task_input_range] {
            if lo > hi {
                return bad("ranges must satisfy lo <= hi");
            }
        }
        if self.seed_pool_depth.0 > self.seed_pool_depth.1 || self.holdout_depth.0 > self.holdout_depth.1 {
            return bad("depth ranges must satisfy lo <= hi");
        }
        let s = &self.proposer_shape;
        if s.literal_lo > s.literal_hi || s.input_lo > s.input_hi || s.literal_hi - s.literal_lo >= 16 {
            return bad("proposer literal range must hold 1 to 16 values and input range must be ordered");
        }
        if s.max_depth < 1 {
            return bad("proposer.max_depth must be at least 1");
        }
        if self.solver_shape.constants.len() > 6 {
            return bad("at most six solver constants");
        }
        Ok(())
    }

    /// Reads a flat key-value config. Keys absent from the file keep their
    /// defaults; unknown keys are an error.
    pub fn from_kv(kv: &Kv) -> Result<Self, ConfigError> {
        kv.check_keys(KEYS)?;
        let label: Label = match kv.get("label") {
            Some(_) => kv.str("label")?.parse()?,
            None => RunConfig::default().label,
        };
        let mut c = RunConfig::for_label(label);
        macro_rules! opt {
            ($key:literal, $getter:ident, $field:expr) => {
                if kv.get($key).is_some() {
                    $field = kv.$getter($key)?;
                }
            };
        }
        opt!("gate.epsilon", f64, c.epsilon);
        opt!("steps", u64, c.steps);
        opt!("seed", u64, c.seed);
        opt!("gate.seed", u64, c.gate_seed);
        opt!("holdout_seed", u64, c.holdout_seed);
        opt!("proposer_batch", usize, c.proposer_batch);
        opt!("solver_batch", usize, c.solver_batch);
        opt!("group_size", usize, c.group_size);
        opt!("estimate_rollouts", usize, c.estimate_rollouts);
        opt!("pool_cap", usize, c.pool_cap);
        opt!("seed_pool_size", usize, c.seed_pool_size);
        opt!("lr", f64, c.update.lr);
        opt!("proposer_lr", f64, c.proposer_lr);
        opt!("clip", f64, c.update.clip);
        opt!("kl_coef", f64, c.update.kl_coef);
        opt!("holdout_n", usize, c.holdout_n);
        opt!("holdout_every", u64, c.holdout_every);
        opt!("record_rollouts", bool, c.record_rollouts);
        opt!("train_on_rejected", bool, c.train_on_rejected);
        opt!("proposer.max_depth", usize, c.proposer_shape.max_depth);
        opt!("proposer.malformed", f64, c.proposer_init.malformed);
        opt!("proposer.fidelity", f64, c.proposer_init.fidelity);
        opt!("solver.depth_buckets", usize, c.solver_shape.depth_buckets);
        opt!("solver.garbage_range", i64, c.solver_shape.garbage_range);
        opt!("solver.eval", f64, c.solver_init.eval);
        opt!("solver.noise", f64, c.solver_init.noise);
        if kv.get("out").is_some() {
            c.out = Some(PathBuf::from(kv.str("out")?));
        }
        if let Some(r) = range(kv, "seed_pool_depth")? {
            c.seed_pool_depth = r;
        }
        if let Some(r) = range(kv, "task_literal_range")? {
            c.task_literal_range = r;
        }
        if let Some(r) = range(kv, "task_input_range")? {
            c.task_input_range = r;
        }
        if let Some(r) = range(kv, "holdout_depth")? {
            c.holdout_depth = r;
        }
        if let Some((lo, hi)) = range(kv, "proposer.literal_range")? {
            c.proposer_shape.literal_lo = lo;
            c.proposer_shape.literal_hi = hi;
        }
        if let Some((lo, hi)) = range(kv, "proposer.input_range")? {
            c.proposer_shape.input_lo = lo;
            c.proposer_shape.input_hi = hi;
        }
        if kv.get("proposer.productions").is_some() {
            let v = kv.f64_list("proposer.productions")?;
            c.proposer_init.productions = v
                .try_into()
                .map_err(|_| ConfigError::Invalid("proposer.productions needs 5 values".into()))?;
        }
        if kv.get("solver.constants").is_some() {
            c.solver_shape.constants = kv.i64_list("solver.constants")?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_kv(&self) -> Kv {
        let mut kv = Kv::default();
        let r = |(a, b): (i64, i64)| format!("{a}:{b}");
        let ru = |(a, b): (usize, usize)| format!("{a}:{b}");
        kv.set("label", self.label.to_string());
        kv.set("gate.epsilon", self.epsilon);
        kv.set("steps", self.steps as i64);
        kv.set("seed", self.seed as i64);
        kv.set("gate.seed", self.gate_seed as i64);
        kv.set("holdout_seed", self.holdout_seed as i64);
        kv.set("proposer_batch", self.proposer_batch as i64);
        kv.set("solver_batch", self.solver_batch as i64);
        kv.set("group_size", self.group_size as i64);
        kv.set("estimate_rollouts", self.estimate_rollouts as i64);
        kv.set("pool_cap", self.pool_cap as i64);
        kv.set("seed_pool_size", self.seed_pool_size as i64);
        kv.set("seed_pool_depth", ru(self.seed_pool_depth));
        kv.set("task_literal_range", r(self.task_literal_range));
        kv.set("task_input_range", r(self.task_input_range));
        kv.set("lr", self.update.lr);
        kv.set("proposer_lr", self.proposer_lr);
        kv.set("train_on_rejected", self.train_on_rejected);
        kv.set("clip", self.update.clip);
        kv.set("kl_coef", self.update.kl_coef);
        kv.set("holdout_n", self.holdout_n as i64);
        kv.set("holdout_depth", ru(self.holdout_depth));
        kv.set("holdout_every", self.holdout_every as i64);
        kv.set("record_rollouts", self.record_rollouts);
        if let Some(out) = &self.out {
            kv.set("out", out.display().to_string());
        }
        let ps = &self.proposer_shape;
        kv.set("proposer.max_depth", ps.max_depth as i64);
        kv.set("proposer.literal_range", r((ps.literal_lo, ps.literal_hi)));
        kv.set("proposer.input_range", r((ps.input_lo, ps.input_hi)));
        kv.set("proposer.productions", crate::kv::float_array(&self.proposer_init.productions));
        kv.set("proposer.malformed", self.proposer_init.malformed);
        kv.set("proposer.fidelity", self.proposer_init.fidelity);
        kv.set(
            "solver.constants",
            toml::Value::Array(self.solver_shape.constants.iter().map(|&c| c.into()).collect()),
        );
        kv.set("solver.depth_buckets", self.solver_shape.depth_buckets as i64);
        kv.set("solver.garbage_range", self.solver_shape.garbage_range);
        kv.set("solver.eval", self.solver_init.eval);
        kv.set("solver.noise", self.solver_init.noise);
        kv
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_kv(&Kv::parse(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_kv().render()).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        let labels = Label::matrix();
        assert_eq!(labels.len(), 7);
        for l in labels {
            assert_eq!(l.to_string().parse::<Label>().unwrap(), l);
            let eps = RunConfig::for_label(l).epsilon;
            assert_eq!(eps, if l.gate == GateMode::Exec { 0.0 } else { 1.0 });
        }
        assert_eq!("GI+off".parse::<Label>().unwrap().proposer, RewardKind::Grounded);
        for bad in ["GI", "GX+off", "GII+off", "GI+on", ""] {
            assert!(bad.parse::<Label>().is_err(), "{bad}");
        }
    }

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig::for_label("GI+exec".parse().unwrap());
        c.epsilon = 0.2;
        c.proposer_lr = 0.1;
        c.solver_shape.depth_buckets = 3;
        c.out = Some("runs/x".into());
        let back = RunConfig::from_kv(&Kv::parse(&c.to_kv().render()).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c = RunConfig::from_kv(&Kv::parse("label = \"GG+exec\"\nsteps = 20\n").unwrap()).unwrap();
        assert_eq!(c.steps, 20);
        assert_eq!(c.epsilon, 0.0);
        assert_eq!(c.group_size, 16);
        assert!(RunConfig::from_kv(&Kv::parse("stepz = 3").unwrap()).is_err());
        assert!(RunConfig::from_kv(&Kv::parse("epsilon = 1.5").unwrap()).is_err());
    }
}
