//! Draw the stratified holdout, score the initial solver, train, save the
//! params and score them again after reloading.

use gated_selfplay::harness::{generate_holdout, holdout_eval, holdout_spec, Label, RunConfig, Runner};
use gated_selfplay::policy::PolicySnapshot;

fn main() {
    let cfg = RunConfig {
        steps: 300,
        ..RunConfig::for_label("GG+exec".parse::<Label>().unwrap())
    };
    let tasks = generate_holdout(&holdout_spec(&cfg)).unwrap();
    let mut by_depth = [0usize; 7];
    for t in &tasks {
        by_depth[t.depth().unwrap()] += 1;
    }
    println!("{} holdout tasks, by depth {:?}", tasks.len(), &by_depth[4..]);
    println!("  e.g. {} at {:?} = {}", tasks[0].program_text, tasks[0].input, tasks[0].output.as_ref().unwrap());

    let mut runner = Runner::new(cfg.clone()).unwrap();
    let before = holdout_eval(&runner.state().policy.solver, &tasks, cfg.holdout_seed, 0);
    runner.run_to_end().unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.toml");
    runner.state().policy.save(&path).unwrap();
    let loaded = PolicySnapshot::load(&path).unwrap();
    let after = holdout_eval(&loaded.solver, &tasks, cfg.holdout_seed, 0);
    println!("accuracy before {before:.3}, after {} steps {after:.3}", cfg.steps);
    println!("(same as: gated-selfplay holdout --params {})", path.display());
}
