//! Sampling from the toy proposer and solver, and one clipped update.

use gated_selfplay::gate::exec_check;
use gated_selfplay::policy::{
    policy_update, proposer_sample, solver_sample, Episode, ProposerInit, ProposerParams, ProposerShape, SolverInit,
    SolverParams, SolverShape, UpdateConfig,
};
use gated_selfplay::pool::Task;
use gated_selfplay::rewards::{RewardKind, RolloutGroup};
use gated_selfplay::rng::{stream, Purpose};

fn main() {
    let proposer = ProposerParams::new(ProposerShape::default(), &ProposerInit::default());
    println!("proposer: malformed {:.3}, fidelity {:.3}", proposer.malformed_prob(), proposer.fidelity_prob());
    for i in 0..6 {
        let c = proposer_sample(&proposer, &mut stream(1, Purpose::Propose, 0, i));
        let out = exec_check(&c.program_text, c.input);
        println!("  {:<40} at {:?} claims {:>4}  exec={}", c.program_text, c.input, c.claimed, out.exec());
    }

    let shape = SolverShape {
        depth_buckets: 4,
        ..SolverShape::default()
    };
    let mut solver = SolverParams::new(shape, &SolverInit::default());
    let anchor = solver.clone();
    let text = "SUB(MUL(x, y), 4)";
    let task = Task {
        id: 0,
        program_text: text.into(),
        expr: gated_selfplay::dsl::parse(text).ok(),
        input: (3, 5),
        output: Some("11".into()),
        claimed: Some("11".into()),
        exec: true,
        step: 0,
    };
    let fmt = |p: Vec<f64>| p.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ");
    println!("\nsolver strategies {:?}", solver.shape.strategies().iter().map(|s| s.to_string()).collect::<Vec<_>>());
    println!("  before: {}", fmt(solver.strategy_probs(Some(2))));
    for step in 0..20u64 {
        let (answers, traces): (Vec<String>, Vec<_>) = (0..16)
            .map(|k| solver_sample(&solver, &task, &mut stream(2, Purpose::Rollout, step, k)))
            .unzip();
        let group = RolloutGroup::score(&task, answers, RewardKind::Grounded).unwrap();
        let episodes: Vec<Episode> = traces
            .into_iter()
            .zip(&group.advantages)
            .map(|(t, &a)| Episode::new(&solver, t, a))
            .collect();
        let stats = policy_update(&mut solver, &anchor, &episodes, &UpdateConfig::default()).unwrap();
        if step % 5 == 4 {
            println!("  step {:>2}: kl {:.4}, clipped {:.2}, |g| {:.3}", step + 1, stats.mean_kl, stats.clipped_fraction, stats.grad_norm);
        }
    }
    println!("  after:  {}", fmt(solver.strategy_probs(Some(2))));
}
