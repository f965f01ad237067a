//! The 15-operator prefix-expression language: parsing, rendering,
//! evaluation, probe validation, random generation, and answer
//! canonicalization.

mod answer;
mod eval;
mod expr;
mod generate;
mod parse;

pub use answer::{canonicalize_answer, CanonicalAnswer};
pub use eval::{evaluate, evaluate_i64, evaluate_with, probe_validate, EvalResult, PROBE_RANGE};
pub use expr::{BinaryOp, CmpOp, Cond, Expr, UnaryOp, Var};
pub use generate::{generate, generate_where, GenSpec, GenerateError, RETRY_BUDGET};
pub use parse::{parse, ParseError};
pub(crate) use parse::token_spans;
