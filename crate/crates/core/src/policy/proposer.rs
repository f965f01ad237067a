//! The proposer: a depth-bucketed probabilistic grammar over DSL
//! expressions, plus a malformed-emission coin and a claimed-output channel.

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::{full_mask, sample_bernoulli, sample_categorical, sample_uniform, sigmoid, Trace};
use super::{MissingTrace, Policy, Slot};
use crate::dsl::{self, BinaryOp, CmpOp, Cond, EvalResult, Expr, UnaryOp, Var};

const EXPR_LEN: usize = 5;
const PROD_LIT: usize = 0;
const PROD_VAR: usize = 1;
const PROD_UNARY: usize = 2;
const PROD_BINARY: usize = 3;
const PROD_ITE: usize = 4;
const BUCKET_LEN: usize = EXPR_LEN + 2 + 7 + 5 + 2;

/// Shape of the proposer's parameter vector and sampling ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposerShape {
    /// Deepest node level; nodes at this level are forced leaves.
    pub max_depth: usize,
    pub literal_lo: i64,
    pub literal_hi: i64,
    pub input_lo: i64,
    pub input_hi: i64,
}

impl Default for ProposerShape {
    fn default() -> Self {
        ProposerShape {
            max_depth: 6,
            literal_lo: -3,
            literal_hi: 3,
            input_lo: -10,
            input_hi: 10,
        }
    }
}

impl ProposerShape {
    fn literal_count(&self) -> usize {
        (self.literal_hi - self.literal_lo + 1) as usize
    }

    fn literal_offset(&self) -> usize {
        (self.max_depth + 1) * BUCKET_LEN
    }

    pub fn malformed_index(&self) -> usize {
        self.literal_offset() + self.literal_count()
    }

    pub fn fidelity_index(&self) -> usize {
        self.malformed_index() + 1
    }

    pub fn len(&self) -> usize {
        self.fidelity_index() + 1
    }

    fn bucket(&self, level: usize) -> usize {
        level * BUCKET_LEN
    }
}

/// Initial logits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposerInit {
    /// literal, variable, unary, binary, ITE
    pub productions: [f64; EXPR_LEN],
    pub malformed: f64,
    pub fidelity: f64,
}

impl Default for ProposerInit {
    fn default() -> Self {
        ProposerInit {
            productions: [0.0, 0.5, -1.0, 0.3, -1.5],
            malformed: -2.5,
            fidelity: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposerParams {
    pub shape: ProposerShape,
    pub theta: Vec<f64>,
}

impl ProposerParams {
    pub fn new(shape: ProposerShape, init: &ProposerInit) -> Self {
        assert!(shape.literal_lo <= shape.literal_hi && shape.input_lo <= shape.input_hi);
        assert!(shape.literal_count() <= 16, "literal alphabet is limited to 16 values");
        let mut theta = vec![0.0; shape.len()];
        for level in 0..=shape.max_depth {
            let b = shape.bucket(level);
            theta[b..b + EXPR_LEN].copy_from_slice(&init.productions);
        }
        theta[shape.malformed_index()] = init.malformed;
        theta[shape.fidelity_index()] = init.fidelity;
        ProposerParams { shape, theta }
    }

    pub fn malformed_prob(&self) -> f64 {
        sigmoid(self.theta[self.shape.malformed_index()])
    }

    pub fn fidelity_prob(&self) -> f64 {
        sigmoid(self.theta[self.shape.fidelity_index()])
    }

    fn expr_mask(&self, level: usize) -> u16 {
        let d = self.shape.max_depth;
        if level >= d {
            (1 << PROD_LIT) | (1 << PROD_VAR)
        } else if level + 1 == d {
            full_mask(EXPR_LEN) & !(1 << PROD_ITE)
        } else {
            full_mask(EXPR_LEN)
        }
    }

    fn sample_expr<R: Rng + ?Sized>(&self, level: usize, rng: &mut R, trace: &mut Trace) -> Expr {
        let b = self.shape.bucket(level) as u32;
        let th = &self.theta;
        let prod = sample_categorical(th, &[b], EXPR_LEN, self.expr_mask(level), rng, trace);
        match prod {
            PROD_LIT => {
                let off = self.shape.literal_offset() as u32;
                let n = self.shape.literal_count();
                let k = sample_categorical(th, &[off], n, full_mask(n), rng, trace);
                Expr::lit(self.shape.literal_lo + k as i64)
            }
            PROD_VAR => {
                let k = sample_categorical(th, &[b + 19], 2, full_mask(2), rng, trace);
                Expr::Var(Var::ALL[k])
            }
            PROD_UNARY => {
                let k = sample_categorical(th, &[b + 5], 2, full_mask(2), rng, trace);
                Expr::unary(UnaryOp::ALL[k], self.sample_expr(level + 1, rng, trace))
            }
            PROD_BINARY => {
                let k = sample_categorical(th, &[b + 7], 7, full_mask(7), rng, trace);
                let lhs = self.sample_expr(level + 1, rng, trace);
                let rhs = self.sample_expr(level + 1, rng, trace);
                Expr::binary(BinaryOp::ALL[k], lhs, rhs)
            }
            _ => {
                let cb = self.shape.bucket(level + 1) as u32;
                let k = sample_categorical(th, &[cb + 14], 5, full_mask(5), rng, trace);
                let lhs = self.sample_expr(level + 2, rng, trace);
                let rhs = self.sample_expr(level + 2, rng, trace);
                let cond = Cond::new(CmpOp::ALL[k], lhs, rhs);
                let t = self.sample_expr(level + 1, rng, trace);
                let e = self.sample_expr(level + 1, rng, trace);
                Expr::ite(cond, t, e)
            }
        }
    }
}

impl Policy for ProposerParams {
    fn theta(&self) -> &[f64] {
        &self.theta
    }

    fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn slots(&self) -> Vec<Slot> {
        let s = &self.shape;
        let mut out = Vec::new();
        for level in 0..=s.max_depth {
            let b = s.bucket(level);
            for (name, off, len) in [
                ("production", 0, EXPR_LEN),
                ("unary", 5, 2),
                ("binary", 7, 7),
                ("compare", 14, 5),
                ("variable", 19, 2),
            ] {
                out.push(Slot::categorical(format!("{name}.d{level}"), b + off, len));
            }
        }
        out.push(Slot::categorical("literal".into(), s.literal_offset(), s.literal_count()));
        out.push(Slot::bernoulli("malformed".into(), s.malformed_index()));
        out.push(Slot::bernoulli("fidelity".into(), s.fidelity_index()));
        out
    }
}

/// A proposed task before gating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTask {
    pub program_text: String,
    pub input: (i64, i64),
    /// Output the proposer claims for its program on `input`.
    pub claimed: String,
    /// True when the text was deliberately corrupted.
    pub malformed: bool,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

/// Samples a candidate task.
///
/// With probability `σ(malformed)` one token of the rendered program is
/// deleted, which always breaks the parse. The claim is the true value with
/// probability `σ(fidelity)` and otherwise a uniform pick from
/// `{0, v+1, v-1}`; when evaluation rejects, the claim is a uniform literal.
pub fn proposer_sample<R: Rng + ?Sized>(p: &ProposerParams, rng: &mut R) -> CandidateTask {
    let s = &p.shape;
    let mut trace = Trace::default();
    let malformed = sample_bernoulli(&p.theta, s.malformed_index(), rng, &mut trace);
    let expr = p.sample_expr(0, rng, &mut trace);
    let span = (s.input_hi - s.input_lo + 1) as u64;
    let x = s.input_lo + sample_uniform(span, rng, &mut trace) as i64;
    let y = s.input_lo + sample_uniform(span, rng, &mut trace) as i64;
    let claimed = match dsl::evaluate_i64(&expr, x, y) {
        EvalResult::Value(v) => {
            if sample_bernoulli(&p.theta, s.fidelity_index(), rng, &mut trace) {
                v
            } else {
                match sample_uniform(3, rng, &mut trace) {
                    0 => BigInt::from(0),
                    1 => v + 1,
                    _ => v - 1,
                }
            }
        }
        EvalResult::Rejected => {
            let k = sample_uniform(s.literal_count() as u64, rng, &mut trace);
            BigInt::from(s.literal_lo + k as i64)
        }
    };
    let rendered = expr.render();
    let program_text = if malformed {
        let spans = dsl::token_spans(&rendered).expect("rendered text tokenizes");
        let k = sample_uniform(spans.len() as u64, rng, &mut trace) as usize;
        let cut = spans[k].clone();
        format!("{}{}", &rendered[..cut.start], &rendered[cut.end..])
    } else {
        rendered
    };
    CandidateTask {
        program_text,
        input: (x, y),
        claimed: claimed.to_string(),
        malformed,
        trace: Some(trace),
    }
}

pub fn proposer_logprob(p: &ProposerParams, candidate: &CandidateTask) -> Result<f64, MissingTrace> {
    candidate
        .trace
        .as_ref()
        .map(|t| t.logprob(&p.theta))
        .ok_or(MissingTrace)
}
