//! All seven labels from one base config.
//!
//! cargo run --release --example run_matrix -- [steps]

use gated_selfplay::harness::{run_matrix, RunConfig};

fn main() {
    let steps: u64 = std::env::args().nth(1).map_or(500, |s| s.parse().expect("steps"));
    let base = RunConfig {
        steps,
        ..RunConfig::default()
    };
    println!("label     max gap  first gap>=0.8  final holdout");
    for (label, result) in run_matrix(&base) {
        let log = result.expect("run");
        println!(
            "{:<8}  {:>7.3}  {:>14}  {:>13.3}",
            label.to_string(),
            log.max_gap().unwrap_or(f64::NAN),
            log.first_step_gap_at_least(0.8).map_or("-".into(), |s| s.to_string()),
            log.final_holdout().unwrap_or(f64::NAN)
        );
    }
}
