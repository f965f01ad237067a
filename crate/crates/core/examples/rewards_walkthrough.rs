//! Scoring one rollout group both ways, and the proposer's reward.

use gated_selfplay::dsl;
use gated_selfplay::policy::{SolverInit, SolverParams, SolverShape};
use gated_selfplay::pool::Task;
use gated_selfplay::rewards::{estimate_accuracy, proposer_reward, Reference, RewardKind, RolloutGroup};
use gated_selfplay::rng::{stream, Purpose};

fn main() {
    let task = Task {
        id: 0,
        program_text: "ADD(MUL(x, 2), y)".into(),
        expr: dsl::parse("ADD(MUL(x, 2), y)").ok(),
        input: (3, 1),
        output: Some("7".into()),
        claimed: Some("7".into()),
        exec: true,
        step: 0,
    };
    let groups = [
        ("mostly right", vec!["7", "7", "7", "7", "7", "6", "8", "7"]),
        ("agree on a wrong answer", vec!["0", "0", "0", "0", "0", "0", "0", "7"]),
        ("all different", vec!["1", "2", "3", "4", "5", "6", "7", "8"]),
    ];
    for (name, answers) in groups {
        let answers: Vec<String> = answers.into_iter().map(String::from).collect();
        let g = RolloutGroup::score(&task, answers.clone(), RewardKind::Intrinsic).unwrap();
        let adv: Vec<String> = g.advantages.iter().map(|a| format!("{a:+.2}")).collect();
        println!("{name}: {answers:?}");
        println!(
            "  intrinsic mean {:.3}, grounded mean {:.3}, gap {:+.3}",
            g.intrinsic_mean(),
            g.grounded_mean().unwrap(),
            g.gap().unwrap()
        );
        println!("  advantages {}", adv.join(" "));
    }

    let solver = SolverParams::new(SolverShape::default(), &SolverInit::default());
    let mut rng = stream(3, Purpose::Estimate, 0, 0);
    let est = estimate_accuracy(&task, &solver, Reference::Executor, 8, &mut rng).unwrap();
    println!(
        "\nfresh solver: {}/{} correct, proposer reward {:.3}",
        est.correct,
        est.rollouts,
        proposer_reward(&est)
    );
}
