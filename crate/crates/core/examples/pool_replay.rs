//! FIFO eviction and batch composition in a small pool.

use gated_selfplay::pool::{Pool, Task};
use gated_selfplay::rng::{stream, Purpose};

fn task(id: u64, step: u64) -> Task {
    Task {
        id,
        program_text: format!("ADD(x, {id})"),
        expr: gated_selfplay::dsl::parse(&format!("ADD(x, {id})")).ok(),
        input: (1, 0),
        output: Some((id + 1).to_string()),
        claimed: Some((id + 1).to_string()),
        exec: true,
        step,
    }
}

fn main() {
    let mut pool = Pool::new(6).unwrap();
    let mut next = 0;
    for step in 1..=4u64 {
        pool.begin_step();
        for _ in 0..3 {
            if let Some(gone) = pool.insert(task(next, step)).unwrap() {
                println!("step {step}: inserting {next} evicts {gone}");
            }
            next += 1;
        }
        let batch = pool.sample_batch(4, &mut stream(0, Purpose::PoolSample, step, 0)).unwrap();
        let ids: Vec<u64> = batch.iter().map(|t| t.id).collect();
        let held: Vec<u64> = pool.tasks().map(|t| t.id).collect();
        println!("step {step}: pool {held:?}, batch {ids:?} (this step's admissions lead)");
    }
}
