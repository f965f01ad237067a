//! Reference evaluator written straight from the operator table, sharing no
//! code with the crate's parser or interpreter. It works on the rendered
//! text and does its own floor division.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' | ',' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// `None` is the rejection symbol.
pub fn oracle_eval(text: &str, x: i64, y: i64) -> Option<BigInt> {
    let toks = tokens(text);
    let mut pos = 0;
    let v = node(&toks, &mut pos, &BigInt::from(x), &BigInt::from(y));
    assert_eq!(pos, toks.len(), "trailing tokens in {text}");
    v.value
}

struct Out {
    value: Option<BigInt>,
}

fn args(toks: &[String], pos: &mut usize, n: usize, x: &BigInt, y: &BigInt) -> Vec<Option<BigInt>> {
    assert_eq!(toks[*pos], "(");
    *pos += 1;
    let mut v = Vec::new();
    for i in 0..n {
        if i > 0 {
            assert_eq!(toks[*pos], ",");
            *pos += 1;
        }
        v.push(node(toks, pos, x, y).value);
    }
    assert_eq!(toks[*pos], ")");
    *pos += 1;
    v
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    // truncating quotient, then step down when signs differ and it was inexact
    let q = a / b;
    if (&q * b != *a) && ((a.is_negative()) != (b.is_negative())) {
        q - 1
    } else {
        q
    }
}

fn node(toks: &[String], pos: &mut usize, x: &BigInt, y: &BigInt) -> Out {
    let t = toks[*pos].clone();
    *pos += 1;
    let value = match t.as_str() {
        "x" => Some(x.clone()),
        "y" => Some(y.clone()),
        "NEG" | "ABS" => {
            let a = args(toks, pos, 1, x, y).remove(0);
            a.map(|a| if t == "NEG" { -a } else { a.abs() })
        }
        "ADD" | "SUB" | "MUL" | "DIV" | "MOD" | "MAX" | "MIN" => {
            let v = args(toks, pos, 2, x, y);
            match (&v[0], &v[1]) {
                (Some(a), Some(b)) => match t.as_str() {
                    "ADD" => Some(a + b),
                    "SUB" => Some(a - b),
                    "MUL" => Some(a * b),
                    "DIV" if b.is_zero() => None,
                    "DIV" => Some(floor_div(a, b)),
                    "MOD" if b.is_zero() => None,
                    "MOD" => Some(a - b * floor_div(a, b)),
                    "MAX" => Some(a.max(b).clone()),
                    _ => Some(a.min(b).clone()),
                },
                _ => None,
            }
        }
        "ITE" => {
            assert_eq!(toks[*pos], "(");
            *pos += 1;
            let cmp = toks[*pos].clone();
            *pos += 1;
            let ab = args(toks, pos, 2, x, y);
            assert_eq!(toks[*pos], ",");
            *pos += 1;
            let then = node(toks, pos, x, y).value;
            assert_eq!(toks[*pos], ",");
            *pos += 1;
            let other = node(toks, pos, x, y).value;
            assert_eq!(toks[*pos], ")");
            *pos += 1;
            match (&ab[0], &ab[1]) {
                (Some(a), Some(b)) => {
                    let c = match cmp.as_str() {
                        "GT" => a > b,
                        "LT" => a < b,
                        "EQ" => a == b,
                        "GEQ" => a >= b,
                        "LEQ" => a <= b,
                        other => panic!("unknown comparator {other}"),
                    };
                    // only the taken branch matters
                    if c {
                        then
                    } else {
                        other
                    }
                }
                _ => None,
            }
        }
        lit => Some(lit.parse::<BigInt>().unwrap_or_else(|_| panic!("bad token {lit}"))),
    };
    Out { value }
}

/// Probe check by brute force over the 5×5 grid.
pub fn oracle_probe(text: &str) -> bool {
    (-2..=2).all(|x| (-2..=2).all(|y| oracle_eval(text, x, y).is_some()))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
