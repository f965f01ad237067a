//! Acceptance criteria, one line each. Runs as a plain binary so every
//! line prints even when an earlier criterion fails.

mod common;

use std::collections::HashMap;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use gated_selfplay::dsl::{self, GenSpec};
use gated_selfplay::gate::{admit, exec_check, GateConfig};
use gated_selfplay::harness::{
    adaptive_schedule, late_stage, median, run, run_matrix, write_run, Label, RunConfig, RunLog, Runner, DEFAULT_GRID,
};
use gated_selfplay::policy::{
    proposer_sample, solver_sample, surrogate_gradient, surrogate_objective, Episode, Policy, ProposerInit,
    ProposerParams, ProposerShape, SolverInit, SolverParams, SolverShape, UpdateConfig,
};
use gated_selfplay::pool::{Pool, Task};
use gated_selfplay::rewards::intrinsic_rewards;
use gated_selfplay::rng::{stream, Purpose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn label(s: &str) -> Label {
    s.parse().unwrap()
}

/// Replicate `k` of a configuration: policy and gate seeds move together,
/// the holdout set stays fixed.
fn replicate(cfg: &RunConfig, k: u64) -> RunConfig {
    RunConfig {
        seed: k,
        gate_seed: 1000 + k,
        ..cfg.clone()
    }
}

fn runs(cfg: &RunConfig, seeds: u64) -> Vec<RunLog> {
    (0..seeds)
        .into_par_iter()
        .map(|k| run(&replicate(cfg, k)).unwrap_or_else(|a| panic!("{}: {}", cfg.label, a.error)))
        .collect()
}

fn med(xs: impl IntoIterator<Item = f64>) -> f64 {
    median(&xs.into_iter().collect::<Vec<_>>()).unwrap_or(f64::NAN)
}

fn first_collapse(log: &RunLog) -> f64 {
    log.first_step_gap_at_least(0.8).map_or(f64::INFINITY, |s| s as f64)
}

fn c1_interpreter_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(71, Purpose::Holdout, 0, 0);
    let mut disagree = 0;
    let mut rejected = 0;
    for i in 0..10_000 {
        let e = dsl::generate(&mut rng, GenSpec::new(0, 6, -10, 10)).unwrap();
        let (x, y) = (rng.gen_range(-10..=10), rng.gen_range(-10..=10));
        let main = dsl::evaluate_i64(&e, x, y).into_value();
        rejected += usize::from(main.is_none());
        if main != common::oracle_eval(&e.render(), x, y) {
            disagree += 1;
            if disagree == 1 {
                eprintln!("  first disagreement at #{i}: {} at ({x}, {y})", e.render());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        disagree == 0 && secs < 10.0,
        format!("10000 expressions, {disagree} disagreements, {rejected} rejected at input, {secs:.2}s"),
    )
}

fn c2_intrinsic_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for _ in 0..1000 {
        let alphabet = rng.gen_range(1..=16);
        let answers: Vec<String> = (0..16).map(|_| rng.gen_range(0..alphabet).to_string()).collect();
        let r = intrinsic_rewards(&answers);
        for (i, a) in answers.iter().enumerate() {
            let pairs = answers.iter().filter(|b| *b == a).count();
            exact &= r[i] == pairs as f64 / 16.0;
        }
        let mut sizes: HashMap<&str, usize> = HashMap::new();
        for a in &answers {
            *sizes.entry(a).or_default() += 1;
        }
        let squares: f64 = sizes.values().map(|&c| (c as f64 / 16.0).powi(2)).sum();
        worst = worst.max((r.iter().sum::<f64>() / 16.0 - squares).abs());
    }
    outcome(
        exact && worst <= 1e-12,
        format!("1000 groups, pairwise counts exact: {exact}, max |mean - sum of squared shares| = {worst:.1e}"),
    )
}

fn c3_gate_frequency() -> Outcome {
    let failing = ["DIV(1, x)", "MOD(y, SUB(x, x))", "DIV(x, 0)", "ITE(GT(x, 0), DIV(1, y), x)"];
    let mut ok = true;
    let mut parts = Vec::new();
    for (j, eps) in [0.05, 0.4, 0.7].into_iter().enumerate() {
        let cfg = GateConfig::new(eps, 300 + j as u64).unwrap();
        let n = 10_000;
        let admitted = (0..n)
            .filter(|&i| {
                let out = exec_check(failing[i % failing.len()], (0, 0));
                assert!(!out.exec());
                admit(&out, &cfg, &mut stream(cfg.seed, Purpose::Gate, 0, i as u64))
            })
            .count();
        let valid = (0..n)
            .filter(|&i| admit(&exec_check("ADD(x, y)", (1, 2)), &cfg, &mut stream(cfg.seed, Purpose::Gate, 1, i as u64)))
            .count();
        let frac = admitted as f64 / n as f64;
        let se = (eps * (1.0 - eps) / n as f64).sqrt();
        let z = (frac - eps) / se;
        ok &= z.abs() <= 3.0 && valid == n;
        parts.push(format!("eps {eps}: {frac:.4} (z {z:+.2}), valid {valid}/{n}"));
    }
    outcome(ok, parts.join("; "))
}

fn c4_pool_discipline() -> Outcome {
    let mut pool = Pool::new(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut next = 0u64;
    let mut expect_evict = 0u64;
    let mut max_len = 0;
    let mut ok = true;
    for _ in 0..100_000 {
        if rng.gen_bool(0.6) {
            pool.begin_step();
            let task = Task {
                id: next,
                program_text: "x".into(),
                expr: dsl::parse("x").ok(),
                input: (0, 0),
                output: Some("0".into()),
                claimed: Some("0".into()),
                exec: true,
                step: next,
            };
            next += 1;
            if let Some(evicted) = pool.insert(task).unwrap() {
                ok &= evicted == expect_evict;
                expect_evict += 1;
            }
        } else if !pool.is_empty() {
            let b = rng.gen_range(1..=16);
            ok &= pool.sample_batch(b, &mut rng).unwrap().len() == b;
        }
        max_len = max_len.max(pool.len());
        ok &= pool.len() <= 64;
    }
    outcome(
        ok,
        format!("{next} inserts, {expect_evict} evictions in id order, max size {max_len} of 64"),
    )
}

fn finite_difference<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let mut up = theta.to_vec();
            let mut down = theta.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

fn c5_gradient_fidelity() -> Outcome {
    let tasks: Vec<Task> = ["ADD(x, MUL(y, 2))", "DIV(x, y)", "ITE(LT(x, y), NEG(x), ABS(SUB(y, 3)))"]
        .iter()
        .map(|t| {
            let expr = dsl::parse(t).unwrap();
            let output = dsl::evaluate_i64(&expr, 4, 0).into_value().map(|v| v.to_string());
            Task {
                id: 0,
                program_text: t.to_string(),
                expr: Some(expr),
                input: (4, 0),
                claimed: output.clone().or(Some("1".into())),
                exec: output.is_some(),
                output,
                step: 0,
            }
        })
        .collect();
    let mut worst: f64 = 0.0;
    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + case);
        let cfg = UpdateConfig {
            lr: 0.05,
            clip: 0.2,
            kl_coef: rng.gen_range(0.0..0.1),
        };
        let jitter = |theta: &mut [f64], rng: &mut ChaCha8Rng, s: f64| {
            for t in theta {
                *t += rng.gen_range(-s..s);
            }
        };
        let (theta, reference, episodes) = if case % 2 == 0 {
            let shape = SolverShape {
                depth_buckets: 2,
                ..SolverShape::default()
            };
            let mut old = SolverParams::new(shape, &SolverInit::default());
            jitter(&mut old.theta, &mut rng, 1.0);
            let n = rng.gen_range(1..=6);
            let episodes: Vec<Episode> = (0..n)
                .map(|_| {
                    let t = &tasks[rng.gen_range(0..tasks.len())];
                    let (_, trace) = solver_sample(&old, t, &mut rng);
                    Episode::new(&old, trace, rng.gen_range(-2.0..2.0))
                })
                .collect();
            let mut cur = old.clone();
            jitter(&mut cur.theta, &mut rng, 0.3);
            let mut anchor = old.clone();
            jitter(&mut anchor.theta, &mut rng, 0.5);
            (cur.theta, anchor.theta, episodes)
        } else {
            let shape = ProposerShape {
                max_depth: 3,
                ..ProposerShape::default()
            };
            let mut old = ProposerParams::new(shape, &ProposerInit::default());
            jitter(&mut old.theta, &mut rng, 1.0);
            let n = rng.gen_range(1..=6);
            let episodes: Vec<Episode> = (0..n)
                .map(|_| {
                    let c = proposer_sample(&old, &mut rng);
                    Episode::new(&old, c.trace.unwrap(), rng.gen_range(-2.0..2.0))
                })
                .collect();
            let mut cur = old.theta().to_vec();
            jitter(&mut cur, &mut rng, 0.3);
            let mut anchor = old.theta().to_vec();
            jitter(&mut anchor, &mut rng, 0.5);
            (cur, anchor, episodes)
        };
        let (analytic, _) = surrogate_gradient(&theta, &reference, &episodes, &cfg);
        let numeric = finite_difference(|t| surrogate_objective(t, &reference, &episodes, &cfg), &theta, 1e-6);
        let diff = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = numeric.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-8);
        worst = worst.max(diff / scale);
    }
    outcome(
        worst <= 1e-4,
        format!("100 episode sets, worst relative error {worst:.2e}"),
    )
}

fn c6_determinism() -> Outcome {
    let base = RunConfig::default();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        for (l, result) in run_matrix(&base) {
            write_run(&result.unwrap(), &dir.path().join(l.to_string())).unwrap();
        }
    }
    let mut same = 0;
    for l in Label::matrix() {
        let read = |d: &tempfile::TempDir| fs::read(d.path().join(l.to_string()).join("metrics.csv")).unwrap();
        same += usize::from(read(&dirs[0]) == read(&dirs[1]));
    }
    outcome(same == 7, format!("{same}/7 metrics.csv files byte-identical across two matrix runs"))
}

fn c7_collapse() -> Outcome {
    let base = RunConfig::default();
    let off = runs(&base.with_label(label("II+off")), 5);
    let exec = runs(&base.with_label(label("II+exec")), 5);
    let off_gap = med(off.iter().map(|l| l.max_gap().unwrap_or(f64::NAN)));
    let exec_gap = med(exec.iter().map(|l| l.max_gap().unwrap_or(f64::NAN)));
    let off_h = med(off.iter().map(|l| l.final_holdout().unwrap()));
    let exec_h = med(exec.iter().map(|l| l.final_holdout().unwrap()));
    outcome(
        off_gap >= 0.8 && exec_gap <= 0.1 && exec_h > off_h,
        format!(
            "II+off max gap {off_gap:.3} (>= 0.8), II+exec max gap {exec_gap:.3} (<= 0.1), \
             final holdout II+exec {exec_h:.3} vs II+off {off_h:.3}"
        ),
    )
}

fn c8_paradox() -> Outcome {
    let base = RunConfig::default();
    let gi = runs(&base.with_label(label("GI+off")), 10);
    let ii = runs(&base.with_label(label("II+off")), 10);
    let gi_exec = runs(&base.with_label(label("GI+exec")), 10);
    let gi_first = med(gi.iter().map(first_collapse));
    let ii_first = med(ii.iter().map(first_collapse));
    let exec_gap = med(gi_exec.iter().map(|l| l.max_gap().unwrap_or(f64::NAN)));
    outcome(
        gi_first.is_finite() && gi_first <= ii_first && exec_gap <= 0.1,
        format!(
            "first step with gap >= 0.8: GI+off {gi_first} vs II+off {ii_first}; GI+exec max gap {exec_gap:.3}"
        ),
    )
}

fn c9_phase_sweep() -> Outcome {
    let base = RunConfig::default().with_label(label("II+exec"));
    let mut gaps = Vec::new();
    let mut holds = Vec::new();
    for eps in DEFAULT_GRID {
        let logs = runs(&RunConfig { epsilon: eps, ..base.clone() }, 5);
        let late: Vec<_> = logs.iter().map(late_stage).collect();
        gaps.push(med(late.iter().map(|l| l.gap.unwrap_or(f64::NAN))));
        holds.push(med(late.iter().map(|l| l.holdout_acc.unwrap_or(f64::NAN))));
    }
    let rho = common::spearman(&DEFAULT_GRID, &gaps);
    let eps_gap = DEFAULT_GRID.iter().zip(&gaps).find(|(_, &g)| g > 0.3).map(|(&e, _)| e);
    let eps_hold = DEFAULT_GRID.iter().zip(&holds).find(|(_, &h)| h <= holds[0] - 0.1).map(|(&e, _)| e);
    let two_stage = match (eps_gap, eps_hold) {
        (Some(g), Some(h)) => g < h,
        (Some(_), None) => true,
        _ => false,
    };
    let table: Vec<String> = DEFAULT_GRID
        .iter()
        .zip(gaps.iter().zip(&holds))
        .map(|(e, (g, h))| format!("{e}:{g:.2}/{h:.2}"))
        .collect();
    outcome(
        rho >= 0.8 && two_stage,
        format!(
            "spearman {rho:.2} (>= 0.8), gap > 0.3 first at {eps_gap:?}, holdout drop >= 0.1 first at {eps_hold:?}; \
             eps:gap/holdout {}",
            table.join(" ")
        ),
    )
}

fn c10_schedule() -> Outcome {
    let base = RunConfig::default().with_label(label("II+exec"));
    let (sched, baseline): (Vec<f64>, Vec<f64>) = (0..5u64)
        .into_par_iter()
        .map(|k| {
            let cfg = replicate(&base, k);
            let dir = tempfile::tempdir().unwrap();
            let s = adaptive_schedule(&cfg, 150, 0.05, dir.path()).unwrap_or_else(|a| panic!("{}", a.error));
            let b = run(&RunConfig { epsilon: 0.0, ..cfg }).unwrap_or_else(|a| panic!("{}", a.error));
            (s.final_holdout().unwrap(), b.final_holdout().unwrap())
        })
        .unzip();
    let (s, b) = (med(sched), med(baseline));
    outcome(
        s <= b,
        format!("final holdout, scheduled (0 -> 0.05 at 150) {s:.3} vs eps=0 baseline {b:.3}"),
    )
}

fn c11_checkpoint() -> Outcome {
    let cfg = RunConfig {
        epsilon: 0.05,
        ..RunConfig::default().with_label(label("II+exec"))
    };
    let whole = run(&cfg).unwrap_or_else(|a| panic!("{}", a.error));
    let dir = tempfile::tempdir().unwrap();
    let mut first = Runner::new(cfg.clone()).unwrap();
    first.run_until(150).unwrap();
    first.checkpoint(dir.path()).unwrap();
    drop(first);
    let mut second = Runner::resume(cfg, dir.path()).unwrap();
    second.run_to_end().unwrap();
    let resumed = second.into_log();
    let tail: Vec<String> = whole
        .records
        .iter()
        .filter(|r| r.metrics.step > 150)
        .map(|r| serde_json::to_string(r).unwrap())
        .collect();
    let got: Vec<String> = resumed.records.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
    outcome(
        !tail.is_empty() && tail == got,
        format!("{} post-switch step records, identical: {}", tail.len(), tail == got),
    )
}

/// Criteria this model does not reach; the README has the analysis. They
/// still run and print FAIL. Set `ACCEPTANCE_STRICT=1` to fail the target on
/// them too. A known failure that starts passing also fails the target, so
/// this list cannot go stale.
const KNOWN_FAILING: &[usize] = &[9];

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("interpreter oracle equivalence", c1_interpreter_oracle),
        ("intrinsic reward algebra", c2_intrinsic_algebra),
        ("gate frequency", c3_gate_frequency),
        ("pool discipline", c4_pool_discipline),
        ("gradient fidelity", c5_gradient_fidelity),
        ("determinism", c6_determinism),
        ("collapse reproduction", c7_collapse),
        ("grounded proposer paradox", c8_paradox),
        ("phase sweep shape", c9_phase_sweep),
        ("adaptive schedule", c10_schedule),
        ("checkpoint fidelity", c11_checkpoint),
    ];
    let strict = std::env::var_os("ACCEPTANCE_STRICT").is_some();
    let mut failed = Vec::new();
    let mut surprises = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let o = check();
        let known = KNOWN_FAILING.contains(&n);
        if !o.pass {
            failed.push(n);
        }
        if o.pass == known {
            surprises.push(n);
        }
        println!(
            "C{n:<2} {} {name}: {} [{:.1}s]",
            match (o.pass, known) {
                (true, _) => "PASS",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 11 criteria pass, failing: {failed:?}", 11 - failed.len());
    if !surprises.is_empty() {
        println!("acceptance: outcome differs from the known-failing list for {surprises:?}");
    }
    if surprises.is_empty() && (failed.is_empty() || !strict) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
