//! One gated and one ungated run of the intrinsic/intrinsic configuration.
//!
//! cargo run --release --example single_run -- [steps] [out-dir]

use std::path::PathBuf;

use gated_selfplay::harness::{run, write_run, Label, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().map_or(500, |s| s.parse().expect("steps"));
    let out = args.next().map(PathBuf::from);

    for label in ["II+exec", "II+off"] {
        let label: Label = label.parse().unwrap();
        let cfg = RunConfig {
            steps,
            ..RunConfig::for_label(label)
        };
        let log = run(&cfg).expect("run");
        println!("== {label}");
        println!(" step  grounded  intrinsic     gap  pool  holdout");
        for r in log.rows().filter(|r| r.step % 50 == 0 || r.step == steps) {
            let f = |v: Option<f64>| v.map_or("     -".to_string(), |v| format!("{v:6.3}"));
            println!(
                "{:>5}    {}     {}  {}  {:>4}   {}",
                r.step,
                f(r.grounded_acc),
                f(r.intrinsic_mean),
                f(r.gap),
                r.pool_size,
                f(r.holdout_acc)
            );
        }
        if let Some(dir) = &out {
            let dir = dir.join(label.to_string());
            write_run(&log, &dir).expect("write");
            println!("wrote {}", dir.display());
        }
    }
}
