//! Parsing, evaluation, probe validation and random generation.

use gated_selfplay::dsl::{self, GenSpec};
use gated_selfplay::rng::{stream, Purpose};

fn main() {
    let collatz = dsl::parse("ITE(EQ(MOD(x, 2), 0), DIV(x, 2), ADD(MUL(x, 3), 1))").unwrap();
    println!("{} has depth {}", collatz.render(), collatz.depth());
    for x in [7, 10, -3] {
        println!("  at x={x}: {:?}", dsl::evaluate_i64(&collatz, x, 0).into_value());
    }

    // floor semantics; only a zero divisor rejects
    for text in ["DIV(-7, 2)", "MOD(-7, 2)", "MOD(7, -2)", "DIV(1, SUB(x, x))"] {
        let e = dsl::parse(text).unwrap();
        match dsl::evaluate_i64(&e, 3, 3).into_value() {
            Some(v) => println!("{text} = {v}"),
            None => println!("{text} = rejected"),
        }
    }

    // values are unbounded
    let big = dsl::parse("MUL(MUL(MUL(x, x), MUL(x, x)), MUL(MUL(x, x), MUL(x, x)))").unwrap();
    println!("x^8 at 1e6 = {:?}", dsl::evaluate_i64(&big, 1_000_000, 0).into_value());

    for text in ["DIV(x, 3)", "DIV(3, x)", "ITE(EQ(x, 0), 0, DIV(3, x))"] {
        let e = dsl::parse(text).unwrap();
        println!("probe check {text}: {}", dsl::probe_validate(&e));
    }

    match dsl::parse("ADD(x, ") {
        Ok(_) => unreachable!(),
        Err(e) => println!("parse error: {e}"),
    }

    let mut rng = stream(7, Purpose::Holdout, 0, 0);
    println!("five generated programs, depth 2..4:");
    for _ in 0..5 {
        let e = dsl::generate(&mut rng, GenSpec::new(2, 4, -5, 5)).unwrap();
        println!("  [{}] {}", e.depth(), e.render());
    }
}
