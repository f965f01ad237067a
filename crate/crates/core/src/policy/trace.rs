//! Recorded sampling traces over a flat logit vector, with exact
//! log-probabilities and their gradients.

use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// One random decision made while sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Draw {
    /// Categorical over `len` outcomes. The logits are the elementwise sum
    /// of the `len`-long parameter blocks starting at each offset in
    /// `blocks`; outcomes whose bit is clear in `allowed` have probability 0.
    Categorical {
        blocks: SmallVec<[u32; 2]>,
        len: u8,
        allowed: u16,
        choice: u8,
    },
    /// Outcome of a coin with success probability `σ(θ[index])`.
    Bernoulli { index: u32, outcome: bool },
    /// Parameter-free uniform choice among `n` outcomes.
    Uniform { n: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub draws: Vec<Draw>,
}

pub fn full_mask(len: usize) -> u16 {
    debug_assert!(len <= 16);
    if len == 16 {
        u16::MAX
    } else {
        (1u16 << len) - 1
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without overflow.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn logits_of(theta: &[f64], blocks: &[u32], len: usize) -> SmallVec<[f64; 8]> {
    let mut out: SmallVec<[f64; 8]> = SmallVec::from_elem(0.0, len);
    for &b in blocks {
        let b = b as usize;
        for (o, t) in out.iter_mut().zip(&theta[b..b + len]) {
            *o += t;
        }
    }
    out
}

/// Masked softmax; masked entries are exactly 0.
pub fn masked_softmax(logits: &[f64], allowed: u16) -> SmallVec<[f64; 8]> {
    let on = |i: usize| allowed & (1 << i) != 0;
    let max = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| on(i))
        .map(|(_, &l)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut p: SmallVec<[f64; 8]> = logits
        .iter()
        .enumerate()
        .map(|(i, &l)| if on(i) { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = p.iter().sum();
    for v in &mut p {
        *v /= z;
    }
    p
}

pub fn categorical_probs(theta: &[f64], blocks: &[u32], len: usize, allowed: u16) -> SmallVec<[f64; 8]> {
    masked_softmax(&logits_of(theta, blocks, len), allowed)
}

/// Draws from a categorical slot and records it in `trace`.
pub fn sample_categorical<R: Rng + ?Sized>(
    theta: &[f64],
    blocks: &[u32],
    len: usize,
    allowed: u16,
    rng: &mut R,
    trace: &mut Trace,
) -> usize {
    let p = categorical_probs(theta, blocks, len, allowed);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut choice = None;
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        acc += pi;
        choice = Some(i);
        if u < acc {
            break;
        }
    }
    let choice = choice.expect("at least one allowed outcome");
    trace.draws.push(Draw::Categorical {
        blocks: blocks.iter().copied().collect(),
        len: len as u8,
        allowed,
        choice: choice as u8,
    });
    choice
}

pub fn sample_bernoulli<R: Rng + ?Sized>(theta: &[f64], index: usize, rng: &mut R, trace: &mut Trace) -> bool {
    let outcome = rng.gen::<f64>() < sigmoid(theta[index]);
    trace.draws.push(Draw::Bernoulli {
        index: index as u32,
        outcome,
    });
    outcome
}

pub fn sample_uniform<R: Rng + ?Sized>(n: u64, rng: &mut R, trace: &mut Trace) -> u64 {
    trace.draws.push(Draw::Uniform { n });
    rng.gen_range(0..n)
}

impl Draw {
    pub fn logprob(&self, theta: &[f64]) -> f64 {
        match self {
            Draw::Categorical {
                blocks,
                len,
                allowed,
                choice,
            } => categorical_probs(theta, blocks, *len as usize, *allowed)[*choice as usize].ln(),
            Draw::Bernoulli { index, outcome } => {
                let t = theta[*index as usize];
                if *outcome {
                    log_sigmoid(t)
                } else {
                    log_sigmoid(-t)
                }
            }
            Draw::Uniform { n } => -(*n as f64).ln(),
        }
    }

    /// Adds `weight · ∂ log p / ∂θ` into `grad`.
    pub fn accumulate_grad(&self, theta: &[f64], weight: f64, grad: &mut [f64]) {
        match self {
            Draw::Categorical {
                blocks,
                len,
                allowed,
                choice,
            } => {
                let len = *len as usize;
                let p = categorical_probs(theta, blocks, len, *allowed);
                for &b in blocks.iter() {
                    let b = b as usize;
                    for (k, &pk) in p.iter().enumerate() {
                        let indicator = if k == *choice as usize { 1.0 } else { 0.0 };
                        grad[b + k] += weight * (indicator - pk);
                    }
                }
            }
            Draw::Bernoulli { index, outcome } => {
                let i = *index as usize;
                let s = sigmoid(theta[i]);
                grad[i] += weight * if *outcome { 1.0 - s } else { -s };
            }
            Draw::Uniform { .. } => {}
        }
    }
}

impl Trace {
    pub fn logprob(&self, theta: &[f64]) -> f64 {
        self.draws.iter().map(|d| d.logprob(theta)).sum()
    }

    pub fn accumulate_grad(&self, theta: &[f64], weight: f64, grad: &mut [f64]) {
        for d in &self.draws {
            d.accumulate_grad(theta, weight, grad);
        }
    }
}
