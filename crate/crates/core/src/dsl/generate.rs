use rand::Rng;
use thiserror::Error;

use super::eval::probe_validate;
use super::expr::{BinaryOp, CmpOp, Cond, Expr, UnaryOp, Var};

/// Attempts per expression before [`generate`] gives up.
pub const RETRY_BUDGET: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("invalid bounds: depth {depth_lo}..={depth_hi}, literals {literal_lo}..={literal_hi}")]
    InvalidBounds {
        depth_lo: usize,
        depth_hi: usize,
        literal_lo: i64,
        literal_hi: i64,
    },
    #[error("no probe-valid expression found after {0} attempts")]
    Exhausted(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub depth_lo: usize,
    pub depth_hi: usize,
    pub literal_lo: i64,
    pub literal_hi: i64,
}

impl GenSpec {
    pub fn new(depth_lo: usize, depth_hi: usize, literal_lo: i64, literal_hi: i64) -> Self {
        GenSpec {
            depth_lo,
            depth_hi,
            literal_lo,
            literal_hi,
        }
    }
}

/// Samples a probe-valid expression whose depth lies in
/// `[depth_lo, depth_hi]`.
///
/// A target depth is drawn uniformly, then a spine of operators is forced
/// down to it while off-spine children get a uniformly drawn smaller depth.
/// Leaves are `x`, `y`, or a literal with equal probability; literal values
/// are uniform on `[literal_lo, literal_hi]`.
pub fn generate<R: Rng + ?Sized>(rng: &mut R, spec: GenSpec) -> Result<Expr, GenerateError> {
    generate_where(rng, spec, |_| true)
}

/// Like [`generate`], with an extra acceptance predicate applied after the
/// probe check. The retry budget is shared.
pub fn generate_where<R, F>(rng: &mut R, spec: GenSpec, mut accept: F) -> Result<Expr, GenerateError>
where
    R: Rng + ?Sized,
    F: FnMut(&Expr) -> bool,
{
    if spec.depth_lo > spec.depth_hi || spec.literal_lo > spec.literal_hi {
        return Err(GenerateError::InvalidBounds {
            depth_lo: spec.depth_lo,
            depth_hi: spec.depth_hi,
            literal_lo: spec.literal_lo,
            literal_hi: spec.literal_hi,
        });
    }
    for _ in 0..RETRY_BUDGET {
        let target = rng.gen_range(spec.depth_lo..=spec.depth_hi);
        let e = exact(rng, target, &spec);
        debug_assert_eq!(e.depth(), target);
        if probe_validate(&e) && accept(&e) {
            return Ok(e);
        }
    }
    Err(GenerateError::Exhausted(RETRY_BUDGET))
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, spec: &GenSpec) -> Expr {
    match rng.gen_range(0..3) {
        0 => Expr::Var(Var::X),
        1 => Expr::Var(Var::Y),
        _ => Expr::lit(rng.gen_range(spec.literal_lo..=spec.literal_hi)),
    }
}

/// Expression of exactly `depth`.
fn exact<R: Rng + ?Sized>(rng: &mut R, depth: usize, spec: &GenSpec) -> Expr {
    if depth == 0 {
        return leaf(rng, spec);
    }
    // 2 unary + 7 binary + ITE; ITE needs depth >= 2 because its condition
    // is itself an operator node.
    let choices = if depth >= 2 { 10 } else { 9 };
    let pick = rng.gen_range(0..choices);
    let below = |rng: &mut R| rng.gen_range(0..depth);
    match pick {
        0 | 1 => Expr::unary(UnaryOp::ALL[pick], exact(rng, depth - 1, spec)),
        2..=8 => {
            let op = BinaryOp::ALL[pick - 2];
            let (a, b) = if rng.gen_bool(0.5) {
                let other = below(rng);
                (exact(rng, depth - 1, spec), exact(rng, other, spec))
            } else {
                let other = below(rng);
                (exact(rng, other, spec), exact(rng, depth - 1, spec))
            };
            Expr::binary(op, a, b)
        }
        _ => {
            let spine = rng.gen_range(0..3);
            let cond_depth = if spine == 0 {
                depth - 1
            } else {
                rng.gen_range(1..depth)
            };
            let cond = exact_cond(rng, cond_depth, spec);
            let t_depth = if spine == 1 { depth - 1 } else { below(rng) };
            let e_depth = if spine == 2 { depth - 1 } else { below(rng) };
            let t = exact(rng, t_depth, spec);
            let e = exact(rng, e_depth, spec);
            Expr::ite(cond, t, e)
        }
    }
}

fn exact_cond<R: Rng + ?Sized>(rng: &mut R, depth: usize, spec: &GenSpec) -> Cond {
    debug_assert!(depth >= 1);
    let op = CmpOp::ALL[rng.gen_range(0..CmpOp::ALL.len())];
    let other = rng.gen_range(0..depth);
    let (a, b) = if rng.gen_bool(0.5) {
        (exact(rng, depth - 1, spec), exact(rng, other, spec))
    } else {
        (exact(rng, other, spec), exact(rng, depth - 1, spec))
    };
    Cond::new(op, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depth_one_is_single_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let e = generate(&mut rng, GenSpec::new(1, 1, -2, 2)).unwrap();
            assert_eq!(e.depth(), 1);
            assert!(!e.is_leaf());
        }
    }

    #[test]
    fn holdout_tier_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..150 {
            let e = generate(&mut rng, GenSpec::new(4, 6, -10, 10)).unwrap();
            assert!((4..=6).contains(&e.depth()));
            assert!(probe_validate(&e));
        }
    }

    #[test]
    fn same_seed_same_expr() {
        let spec = GenSpec::new(2, 5, -10, 10);
        let a = generate(&mut ChaCha8Rng::seed_from_u64(99), spec).unwrap();
        let b = generate(&mut ChaCha8Rng::seed_from_u64(99), spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_bounds_and_exhaustion() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            generate(&mut rng, GenSpec::new(3, 2, 0, 0)),
            Err(GenerateError::InvalidBounds { .. })
        ));
        assert_eq!(
            generate_where(&mut rng, GenSpec::new(0, 0, 0, 0), |_| false),
            Err(GenerateError::Exhausted(RETRY_BUDGET))
        );
    }
}
