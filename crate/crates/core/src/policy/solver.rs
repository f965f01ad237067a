//! The solver: a mixture over answering strategies.
//!
//! `EVAL` runs the interpreter with independent ±1 corruption of each
//! operator node's value, `CONST(c)` answers a fixed constant, and `COPY_X`
//! echoes the `x` input. Every group that picks the same constant agrees
//! with itself, so `CONST` is a perfect self-consistency attractor, while
//! noiseless `EVAL` is the grounded optimum.

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::{categorical_probs, full_mask, sample_bernoulli, sample_categorical, sample_uniform, sigmoid, Trace};
use super::{Policy, Slot};
use crate::dsl::{self, EvalResult};
use crate::pool::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Eval,
    Const(i64),
    CopyX,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Eval => f.write_str("EVAL"),
            Strategy::Const(c) => write!(f, "CONST({c})"),
            Strategy::CopyX => f.write_str("COPY_X"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverShape {
    pub constants: Vec<i64>,
    /// Number of task-depth buckets with their own strategy offsets; 0
    /// means one strategy distribution shared by all tasks.
    pub depth_buckets: usize,
    /// Half-width of the range an `EVAL` answer is drawn from when the
    /// (possibly corrupted) evaluation rejects.
    pub garbage_range: i64,
}

impl Default for SolverShape {
    fn default() -> Self {
        SolverShape {
            constants: vec![-1, 0, 1],
            depth_buckets: 0,
            garbage_range: 1000,
        }
    }
}

impl SolverShape {
    pub fn strategies(&self) -> Vec<Strategy> {
        let mut s = vec![Strategy::Eval];
        s.extend(self.constants.iter().map(|&c| Strategy::Const(c)));
        s.push(Strategy::CopyX);
        s
    }

    pub fn strategy_count(&self) -> usize {
        self.constants.len() + 2
    }

    pub fn noise_index(&self) -> usize {
        self.strategy_count() * (1 + self.depth_buckets)
    }

    pub fn len(&self) -> usize {
        self.noise_index() + 1
    }

    fn blocks(&self, depth: Option<usize>) -> smallvec::SmallVec<[u32; 2]> {
        let mut b = smallvec::smallvec![0u32];
        if let (Some(d), true) = (depth, self.depth_buckets > 0) {
            let bucket = d.min(self.depth_buckets - 1);
            b.push((self.strategy_count() * (1 + bucket)) as u32);
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverInit {
    pub eval: f64,
    pub noise: f64,
}

impl Default for SolverInit {
    fn default() -> Self {
        SolverInit {
            eval: 1.5,
            noise: -3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub shape: SolverShape,
    pub theta: Vec<f64>,
}

impl SolverParams {
    pub fn new(shape: SolverShape, init: &SolverInit) -> Self {
        assert!(shape.strategy_count() <= 8, "at most six constants");
        let mut theta = vec![0.0; shape.len()];
        theta[0] = init.eval;
        theta[shape.noise_index()] = init.noise;
        SolverParams { shape, theta }
    }

    /// Strategy probabilities for a task of the given depth (`None` for an
    /// unparseable task, which cannot be evaluated).
    pub fn strategy_probs(&self, depth: Option<usize>) -> Vec<f64> {
        let k = self.shape.strategy_count();
        categorical_probs(&self.theta, &self.shape.blocks(depth), k, self.mask(depth.is_some())).to_vec()
    }

    pub fn eval_prob(&self, depth: Option<usize>) -> f64 {
        self.strategy_probs(depth)[0]
    }

    /// Per-node corruption probability of `EVAL`.
    pub fn noise_prob(&self) -> f64 {
        sigmoid(self.theta[self.shape.noise_index()])
    }

    fn mask(&self, can_eval: bool) -> u16 {
        let full = full_mask(self.shape.strategy_count());
        if can_eval {
            full
        } else {
            full & !1
        }
    }
}

impl Policy for SolverParams {
    fn theta(&self) -> &[f64] {
        &self.theta
    }

    fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn slots(&self) -> Vec<Slot> {
        let k = self.shape.strategy_count();
        let mut out = vec![Slot::categorical("strategy.base".into(), 0, k)];
        for b in 0..self.shape.depth_buckets {
            out.push(Slot::categorical(format!("strategy.d{b}"), k * (1 + b), k));
        }
        out.push(Slot::bernoulli("noise".into(), self.shape.noise_index()));
        out
    }
}

/// Samples one answer for `task` and the trace that produced it.
pub fn solver_sample<R: Rng + ?Sized>(s: &SolverParams, task: &Task, rng: &mut R) -> (String, Trace) {
    let shape = &s.shape;
    let mut trace = Trace::default();
    let depth = task.depth();
    let k = shape.strategy_count();
    let pick = sample_categorical(&s.theta, &shape.blocks(depth), k, s.mask(depth.is_some()), rng, &mut trace);
    let answer = match shape.strategies()[pick] {
        Strategy::Const(c) => c.to_string(),
        Strategy::CopyX => task.input.0.to_string(),
        Strategy::Eval => {
            let expr = task.expr.as_ref().expect("EVAL is masked for unparseable tasks");
            let x = BigInt::from(task.input.0);
            let y = BigInt::from(task.input.1);
            let noise = shape.noise_index();
            let result = dsl::evaluate_with(expr, &x, &y, |v| {
                if sample_bernoulli(&s.theta, noise, rng, &mut trace) {
                    if sample_uniform(2, rng, &mut trace) == 0 {
                        v + 1
                    } else {
                        v - 1
                    }
                } else {
                    v
                }
            });
            match result {
                EvalResult::Value(v) => v.to_string(),
                EvalResult::Rejected => {
                    let g = shape.garbage_range;
                    let u = sample_uniform((2 * g + 1) as u64, rng, &mut trace) as i64;
                    (u - g).to_string()
                }
            }
        }
    };
    (answer, trace)
}

/// Exact log-probability of a recorded solver trace.
pub fn solver_logprob(s: &SolverParams, trace: &Trace) -> f64 {
    trace.logprob(&s.theta)
}
