//! Proposer/solver self-play on a small integer DSL, with an execution gate
//! of tunable leak rate in front of the task pool.
//!
//! The crate is organised bottom-up:
//!
//! - [`dsl`]: parsing, evaluation, probe validation and generation
//! - [`gate`]: executor check and the leaky admission filter
//! - [`pool`]: the FIFO task buffer and batch sampling
//! - [`rewards`]: grounded and intrinsic rewards, advantages, proposer reward
//! - [`policy`]: the parametric proposer and solver and their update rule
//! - [`harness`]: the training loop, metrics and experiment drivers

pub mod dsl;
pub mod gate;
pub mod harness;
pub mod kv;
pub mod policy;
pub mod pool;
pub mod rewards;
pub mod rng;
