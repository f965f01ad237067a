//! The executor check and the leaky gate.

use gated_selfplay::gate::{admit, exec_check, GateConfig};
use gated_selfplay::rng::{stream, Purpose};

fn main() {
    let cases = [
        ("ADD(x, y)", (2, 3)),
        ("DIV(x, y)", (4, 2)),
        ("DIV(x, y)", (4, 0)),
        ("MOD(x, 0)", (1, 1)),
        // passes the probe grid, fails at the posed input
        ("DIV(1, SUB(x, 5))", (5, 0)),
        ("ADD(x", (0, 0)),
    ];
    for (text, input) in cases {
        let out = exec_check(text, input);
        println!(
            "{text:<18} at {input:?}: exec={} output={:?} failure={:?}",
            out.exec(),
            out.output(),
            out.failure()
        );
    }

    // admission frequency of a failing but parseable task
    let failing = exec_check("DIV(x, y)", (4, 0));
    let n = 20_000;
    println!("\n  eps   admitted   J");
    for eps in [0.0, 0.05, 0.2, 0.7, 1.0] {
        let cfg = GateConfig::new(eps, 11).unwrap();
        let admitted = (0..n)
            .filter(|&i| admit(&failing, &cfg, &mut stream(cfg.seed, Purpose::Gate, 0, i)))
            .count();
        println!("{eps:>5}   {:>8.4}   {:.2}", admitted as f64 / n as f64, cfg.youden_index());
    }
}
