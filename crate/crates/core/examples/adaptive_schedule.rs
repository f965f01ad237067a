//! Train gated for 150 steps, then relax the gate from a snapshot, and
//! compare against the run that stays gated.

use gated_selfplay::harness::{adaptive_schedule, run, Label, RunConfig};

fn main() {
    let cfg = RunConfig::for_label("II+exec".parse::<Label>().unwrap());
    let dir = tempfile::tempdir().unwrap();
    let scheduled = adaptive_schedule(&cfg, 150, 0.05, dir.path()).expect("schedule");
    let baseline = run(&cfg).expect("baseline");
    println!("checkpoint written to {} (params, reference, pool, step)", dir.path().display());
    println!(" step  holdout(scheduled)  holdout(eps=0)");
    for (a, b) in scheduled.rows().zip(baseline.rows()) {
        if let (Some(x), Some(y)) = (a.holdout_acc, b.holdout_acc) {
            println!("{:>5}  {x:>18.3}  {y:>14.3}", a.step);
        }
    }
    let switch = scheduled.records.iter().find(|r| r.switched_from.is_some()).unwrap();
    println!(
        "switch recorded at step {}: eps {} -> {}",
        switch.metrics.step,
        switch.switched_from.unwrap(),
        switch.metrics.epsilon
    );
}
