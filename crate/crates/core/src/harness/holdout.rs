//! The fixed evaluation set: valid expressions of depth 4 to 6, each posed
//! at one input, with the executor output as gold.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::dsl::{self, GenSpec, GenerateError};
use crate::gate::{exec_check_expr, ExecOutcome};
use crate::policy::{solver_sample, SolverParams};
use crate::pool::Task;
use crate::rewards::grounded_reward;
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoldoutSpec {
    pub n: usize,
    pub depth: (usize, usize),
    pub literal_range: (i64, i64),
    pub input_range: (i64, i64),
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum HoldoutError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("holdout line {line}: {reason}")]
    Format { line: usize, reason: String },
}

/// Draws a probe-valid expression and an input at which it evaluates,
/// redrawing both until the execution check passes.
pub(crate) fn sample_valid_task<R: Rng + ?Sized>(
    rng: &mut R,
    gen: GenSpec,
    input_range: (i64, i64),
) -> Result<(dsl::Expr, (i64, i64), String), GenerateError> {
    let (lo, hi) = input_range;
    for _ in 0..dsl::RETRY_BUDGET {
        let expr = dsl::generate(rng, gen)?;
        let input = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
        if let ExecOutcome::Valid { output } = exec_check_expr(&expr, input) {
            return Ok((expr, input, output.to_string()));
        }
    }
    Err(GenerateError::Exhausted(dsl::RETRY_BUDGET))
}

/// Draws `spec.n` tasks stratified by depth: task `i` has depth
/// `lo + i mod (hi - lo + 1)`. Each task uses its own stream, so the set for
/// a given seed does not depend on `n` beyond truncation.
pub fn generate_holdout(spec: &HoldoutSpec) -> Result<Vec<Task>, HoldoutError> {
    let (lo, hi) = spec.depth;
    let tiers = hi.saturating_sub(lo) + 1;
    (0..spec.n)
        .map(|i| {
            let d = lo + i % tiers;
            let gen = GenSpec::new(d, d, spec.literal_range.0, spec.literal_range.1);
            let mut rng = stream(spec.seed, Purpose::Holdout, 0, i as u64);
            let (expr, input, output) = sample_valid_task(&mut rng, gen, spec.input_range)?;
            Ok(Task {
                id: i as u64,
                program_text: expr.render(),
                expr: Some(expr),
                input,
                claimed: Some(output.clone()),
                output: Some(output),
                exec: true,
                step: 0,
            })
        })
        .collect()
}

/// Fraction of tasks answered correctly with one sampled answer each.
/// Answers for task `i` come from stream `(seed, HoldoutAnswers, step, i)`.
pub fn holdout_eval(solver: &SolverParams, tasks: &[Task], seed: u64, step: u64) -> f64 {
    if tasks.is_empty() {
        return 0.0;
    }
    let correct: f64 = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = stream(seed, Purpose::HoldoutAnswers, step, i as u64);
            let (answer, _) = solver_sample(solver, t, &mut rng);
            grounded_reward(&answer, t.output.as_deref().unwrap_or(""))
        })
        .sum();
    correct / tasks.len() as f64
}

/// Writes `expr \t x \t y \t gold \t depth`, one task per line.
pub fn write_holdout(tasks: &[Task], path: &Path) -> Result<(), HoldoutError> {
    let io_err = |source| HoldoutError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for t in tasks {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            t.program_text,
            t.input.0,
            t.input.1,
            t.output.as_deref().unwrap_or("-"),
            t.depth().unwrap_or(0)
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_holdout(path: &Path) -> Result<Vec<Task>, HoldoutError> {
    let text = fs::read_to_string(path).map_err(|source| HoldoutError::Io {
        path: path.display().to_string(),
        source,
    })?;
    text.lines()
        .enumerate()
        .map(|(n, line)| {
            let fmt = |reason: String| HoldoutError::Format { line: n + 1, reason };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(fmt(format!("expected 5 fields, found {}", f.len())));
            }
            let expr = dsl::parse(f[0]).map_err(|e| fmt(e.to_string()))?;
            let num = |s: &str| s.parse::<i64>().map_err(|e| fmt(e.to_string()));
            let depth: usize = f[4].parse().map_err(|e: std::num::ParseIntError| fmt(e.to_string()))?;
            if depth != expr.depth() {
                return Err(fmt(format!("depth column {depth} != {}", expr.depth())));
            }
            Ok(Task {
                id: n as u64,
                program_text: f[0].to_string(),
                expr: Some(expr),
                input: (num(f[1])?, num(f[2])?),
                output: Some(f[3].to_string()),
                claimed: Some(f[3].to_string()),
                exec: true,
                step: 0,
            })
        })
        .collect()
}
