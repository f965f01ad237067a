//! Leak-rate sweep of II with the late-stage phase table, median over seeds.
//!
//! cargo run --release --example epsilon_sweep -- [seeds]

use gated_selfplay::harness::{late_stage, median, run, Label, RunConfig, DEFAULT_GRID};
use rayon::prelude::*;

fn main() {
    let seeds: u64 = std::env::args().nth(1).map_or(3, |s| s.parse().expect("seeds"));
    let base = RunConfig::for_label("II+exec".parse::<Label>().unwrap());
    println!("  eps     J  late gap  late holdout  late eligibility");
    for eps in DEFAULT_GRID {
        let late: Vec<_> = (0..seeds)
            .into_par_iter()
            .map(|s| {
                let cfg = RunConfig {
                    epsilon: eps,
                    seed: s,
                    gate_seed: 1000 + s,
                    ..base.clone()
                };
                late_stage(&run(&cfg).expect("run"))
            })
            .collect();
        let med = |f: fn(&gated_selfplay::harness::LateStage) -> Option<f64>| {
            median(&late.iter().filter_map(f).collect::<Vec<_>>()).unwrap_or(f64::NAN)
        };
        println!(
            "{eps:>5}  {:.2}  {:>8.3}  {:>12.3}  {:>16.3}",
            1.0 - eps,
            med(|l| l.gap),
            med(|l| l.holdout_acc),
            med(|l| l.eligibility)
        );
    }
}
