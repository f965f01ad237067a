use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::expr::{BinaryOp, CmpOp, Cond, Expr, UnaryOp, Var};

/// Probe grid coordinates used by [`probe_validate`].
pub const PROBE_RANGE: std::ops::RangeInclusive<i64> = -2..=2;

/// Result of evaluating an expression: an integer, or the rejection symbol
/// produced by a zero divisor on the evaluated path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EvalResult {
    Value(BigInt),
    Rejected,
}

impl EvalResult {
    pub fn value(&self) -> Option<&BigInt> {
        match self {
            EvalResult::Value(v) => Some(v),
            EvalResult::Rejected => None,
        }
    }

    pub fn into_value(self) -> Option<BigInt> {
        match self {
            EvalResult::Value(v) => Some(v),
            EvalResult::Rejected => None,
        }
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, EvalResult::Rejected)
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalResult::Value(v) => write!(f, "{v}"),
            EvalResult::Rejected => f.write_str("⊥"),
        }
    }
}

struct Rejected;

struct Evaluator<'a, H> {
    x: &'a BigInt,
    y: &'a BigInt,
    hook: H,
}

impl<H: FnMut(BigInt) -> BigInt> Evaluator<'_, H> {
    fn expr(&mut self, e: &Expr) -> Result<BigInt, Rejected> {
        let v = match e {
            Expr::Lit(v) => return Ok(v.clone()),
            Expr::Var(Var::X) => return Ok(self.x.clone()),
            Expr::Var(Var::Y) => return Ok(self.y.clone()),
            Expr::Unary(op, a) => {
                let a = self.expr(a)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Abs => a.abs(),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div | BinaryOp::Mod if b.is_zero() => return Err(Rejected),
                    BinaryOp::Div => a.div_floor(&b),
                    BinaryOp::Mod => a.mod_floor(&b),
                    BinaryOp::Max => a.max(b),
                    BinaryOp::Min => a.min(b),
                }
            }
            Expr::Ite(c, t, otherwise) => {
                if self.cond(c)? {
                    self.expr(t)?
                } else {
                    self.expr(otherwise)?
                }
            }
        };
        Ok((self.hook)(v))
    }

    fn cond(&mut self, c: &Cond) -> Result<bool, Rejected> {
        let a = self.expr(&c.lhs)?;
        let b = self.expr(&c.rhs)?;
        Ok(match c.op {
            CmpOp::Gt => a > b,
            CmpOp::Lt => a < b,
            CmpOp::Eq => a == b,
            CmpOp::Geq => a >= b,
            CmpOp::Leq => a <= b,
        })
    }
}

/// Exact evaluation. DIV is floor division and MOD the matching remainder
/// (sign of the divisor); a zero divisor on the evaluated path rejects.
pub fn evaluate(e: &Expr, x: &BigInt, y: &BigInt) -> EvalResult {
    evaluate_with(e, x, y, |v| v)
}

pub fn evaluate_i64(e: &Expr, x: i64, y: i64) -> EvalResult {
    evaluate(e, &BigInt::from(x), &BigInt::from(y))
}

/// Evaluation with `hook` applied to the value of every integer-valued
/// operator node (unary, binary, and `ITE`), in evaluation order. Leaves and
/// comparison nodes are not hooked. Used by the noisy solver strategy.
pub fn evaluate_with<H>(e: &Expr, x: &BigInt, y: &BigInt, hook: H) -> EvalResult
where
    H: FnMut(BigInt) -> BigInt,
{
    let mut ev = Evaluator { x, y, hook };
    match ev.expr(e) {
        Ok(v) => EvalResult::Value(v),
        Err(Rejected) => EvalResult::Rejected,
    }
}

/// True iff `e` evaluates without rejection on every point of the 5×5 grid
/// `{-2..2}²`.
pub fn probe_validate(e: &Expr) -> bool {
    PROBE_RANGE
        .clone()
        .all(|x| PROBE_RANGE.clone().all(|y| !evaluate_i64(e, x, y).is_rejected()))
}
