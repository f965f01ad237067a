//! Parametric proposer and solver policies.
//!
//! Both policies keep all logits in one flat vector and record every random
//! choice in a [`Trace`], so log-probabilities and their gradients are exact.

mod proposer;
mod solver;
mod trace;
mod update;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kv::{float_array, Kv, KvError};

pub use proposer::{proposer_logprob, proposer_sample, CandidateTask, ProposerInit, ProposerParams, ProposerShape};
pub use solver::{solver_logprob, solver_sample, SolverInit, SolverParams, SolverShape, Strategy};
pub use trace::{categorical_probs, log_sigmoid, masked_softmax, sigmoid, Draw, Trace};
pub use update::{
    policy_update, surrogate_gradient, surrogate_objective, Episode, NonFiniteGradient, UpdateConfig, UpdateStats,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Categorical,
    Bernoulli,
}

/// A named region of a parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    pub kind: SlotKind,
}

impl Slot {
    pub fn categorical(name: String, offset: usize, len: usize) -> Self {
        Slot {
            name,
            offset,
            len,
            kind: SlotKind::Categorical,
        }
    }

    pub fn bernoulli(name: String, index: usize) -> Self {
        Slot {
            name,
            offset: index,
            len: 1,
            kind: SlotKind::Bernoulli,
        }
    }
}

pub trait Policy {
    fn theta(&self) -> &[f64];
    fn theta_mut(&mut self) -> &mut [f64];
    fn slots(&self) -> Vec<Slot>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("candidate carries no sampling trace")]
pub struct MissingTrace;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error(transparent)]
    Kv(#[from] KvError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("slot `{name}` has {found} values, expected {expected}")]
    SlotLength { name: String, expected: usize, found: usize },
}

/// Proposer and solver parameters together.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySnapshot {
    pub proposer: ProposerParams,
    pub solver: SolverParams,
}

fn write_slots<P: Policy>(kv: &mut Kv, prefix: &str, p: &P) {
    for slot in p.slots() {
        let values = &p.theta()[slot.offset..slot.offset + slot.len];
        kv.set(format!("{prefix}.theta.{}", slot.name), float_array(values));
    }
}

fn read_slots<P: Policy>(kv: &Kv, prefix: &str, p: &mut P) -> Result<(), ParamsError> {
    for slot in p.slots() {
        let values = kv.f64_list(&format!("{prefix}.theta.{}", slot.name))?;
        if values.len() != slot.len {
            return Err(ParamsError::SlotLength {
                name: slot.name,
                expected: slot.len,
                found: values.len(),
            });
        }
        p.theta_mut()[slot.offset..slot.offset + slot.len].copy_from_slice(&values);
    }
    Ok(())
}

impl PolicySnapshot {
    pub fn to_kv(&self) -> Kv {
        let mut kv = Kv::default();
        let ps = &self.proposer.shape;
        kv.set("proposer.max_depth", ps.max_depth as i64);
        kv.set("proposer.literal_lo", ps.literal_lo);
        kv.set("proposer.literal_hi", ps.literal_hi);
        kv.set("proposer.input_lo", ps.input_lo);
        kv.set("proposer.input_hi", ps.input_hi);
        write_slots(&mut kv, "proposer", &self.proposer);
        let ss = &self.solver.shape;
        kv.set(
            "solver.constants",
            toml::Value::Array(ss.constants.iter().map(|&c| toml::Value::Integer(c)).collect()),
        );
        kv.set("solver.depth_buckets", ss.depth_buckets as i64);
        kv.set("solver.garbage_range", ss.garbage_range);
        write_slots(&mut kv, "solver", &self.solver);
        kv
    }

    pub fn from_kv(kv: &Kv) -> Result<Self, ParamsError> {
        let shape = ProposerShape {
            max_depth: kv.usize("proposer.max_depth")?,
            literal_lo: kv.i64("proposer.literal_lo")?,
            literal_hi: kv.i64("proposer.literal_hi")?,
            input_lo: kv.i64("proposer.input_lo")?,
            input_hi: kv.i64("proposer.input_hi")?,
        };
        let mut proposer = ProposerParams::new(shape, &ProposerInit::default());
        read_slots(kv, "proposer", &mut proposer)?;
        let shape = SolverShape {
            constants: kv.i64_list("solver.constants")?,
            depth_buckets: kv.usize("solver.depth_buckets")?,
            garbage_range: kv.i64("solver.garbage_range")?,
        };
        let mut solver = SolverParams::new(shape, &SolverInit::default());
        read_slots(kv, "solver", &mut solver)?;
        Ok(PolicySnapshot { proposer, solver })
    }

    pub fn save(&self, path: &Path) -> Result<(), ParamsError> {
        std::fs::write(path, self.to_kv().render()).map_err(|source| ParamsError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ParamsError> {
        let text = std::fs::read_to_string(path).map_err(|source| ParamsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_kv(&Kv::parse(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_tile_the_parameter_vector() {
        let p = ProposerParams::new(ProposerShape::default(), &ProposerInit::default());
        let s = SolverParams::new(
            SolverShape {
                depth_buckets: 4,
                ..SolverShape::default()
            },
            &SolverInit::default(),
        );
        fn covered<P: Policy>(p: &P) {
            let mut seen = vec![0u8; p.theta().len()];
            for slot in p.slots() {
                for c in &mut seen[slot.offset..slot.offset + slot.len] {
                    *c += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
        covered(&p);
        covered(&s);
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let mut snap = PolicySnapshot {
            proposer: ProposerParams::new(ProposerShape::default(), &ProposerInit::default()),
            solver: SolverParams::new(
                SolverShape {
                    depth_buckets: 3,
                    ..SolverShape::default()
                },
                &SolverInit::default(),
            ),
        };
        for (i, t) in snap.proposer.theta.iter_mut().enumerate() {
            *t += (i as f64).sin() / 7.0;
        }
        for (i, t) in snap.solver.theta.iter_mut().enumerate() {
            *t -= (i as f64).cos() / 3.0;
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.toml");
        snap.save(&path).unwrap();
        let back = PolicySnapshot::load(&path).unwrap();
        assert_eq!(back, snap);
    }
}
