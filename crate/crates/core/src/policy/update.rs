//! Clipped-surrogate policy update with a KL anchor to a frozen snapshot.
//!
//! For an episode with recorded trace `τ`, advantage `A`, and sampling-time
//! log-probability `ℓ_old`, let `ℓ = log π_θ(τ)`, `ρ = exp(ℓ - ℓ_old)` and
//! `ℓ_ref = log π_ref(τ)`. The objective averaged over episodes is
//!
//! ```text
//! J(θ) = mean[ min(ρ·A, clip(ρ, 1-c, 1+c)·A) - β·k3 ],
//! k3   = exp(ℓ_ref - ℓ) - (ℓ_ref - ℓ) - 1
//! ```
//!
//! `k3` is the low-variance forward-KL estimator evaluated on the sampled
//! trace; it is non-negative and zero exactly when `ℓ = ℓ_ref`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trace::Trace;
use super::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateConfig {
    pub lr: f64,
    pub clip: f64,
    pub kl_coef: f64,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        UpdateConfig {
            lr: 0.05,
            clip: 0.2,
            kl_coef: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub trace: Trace,
    pub advantage: f64,
    pub old_logprob: f64,
}

impl Episode {
    /// Episode whose sampling policy is `policy` (ratio 1 at the first
    /// inner step).
    pub fn new<P: Policy + ?Sized>(policy: &P, trace: Trace, advantage: f64) -> Self {
        let old_logprob = trace.logprob(policy.theta());
        Episode {
            trace,
            advantage,
            old_logprob,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("non-finite gradient (component {index} = {value}) over {episodes} episodes")]
pub struct NonFiniteGradient {
    pub index: usize,
    pub value: f64,
    pub episodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateStats {
    pub objective: f64,
    pub mean_kl: f64,
    pub clipped_fraction: f64,
    pub grad_norm: f64,
}

fn kl_k3(logprob: f64, ref_logprob: f64) -> f64 {
    let d = ref_logprob - logprob;
    d.exp() - d - 1.0
}

fn clipped_term(ratio: f64, advantage: f64, clip: f64) -> (f64, bool) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    // ties and NaN take the unclipped branch so bad inputs surface
    if clipped < unclipped {
        (clipped, true)
    } else {
        (unclipped, false)
    }
}

/// `J(θ)` for the episodes; the reference is the KL anchor.
pub fn surrogate_objective(theta: &[f64], reference: &[f64], episodes: &[Episode], cfg: &UpdateConfig) -> f64 {
    if episodes.is_empty() {
        return 0.0;
    }
    let total: f64 = episodes
        .iter()
        .map(|ep| {
            let lp = ep.trace.logprob(theta);
            let ratio = (lp - ep.old_logprob).exp();
            let (surr, _) = clipped_term(ratio, ep.advantage, cfg.clip);
            surr - cfg.kl_coef * kl_k3(lp, ep.trace.logprob(reference))
        })
        .sum();
    total / episodes.len() as f64
}

/// Analytic `∇J(θ)`.
pub fn surrogate_gradient(
    theta: &[f64],
    reference: &[f64],
    episodes: &[Episode],
    cfg: &UpdateConfig,
) -> (Vec<f64>, UpdateStats) {
    let mut grad = vec![0.0; theta.len()];
    let mut stats = UpdateStats::default();
    if episodes.is_empty() {
        return (grad, stats);
    }
    let n = episodes.len() as f64;
    let mut clipped = 0usize;
    for ep in episodes {
        let lp = ep.trace.logprob(theta);
        let ref_lp = ep.trace.logprob(reference);
        let ratio = (lp - ep.old_logprob).exp();
        let (surr, is_clipped) = clipped_term(ratio, ep.advantage, cfg.clip);
        let kl = kl_k3(lp, ref_lp);
        stats.objective += (surr - cfg.kl_coef * kl) / n;
        stats.mean_kl += kl / n;
        let surr_weight = if is_clipped {
            clipped += 1;
            0.0
        } else {
            ratio * ep.advantage
        };
        // d k3 / d ℓ = 1 - exp(ℓ_ref - ℓ)
        let kl_weight = 1.0 - (ref_lp - lp).exp();
        let weight = (surr_weight - cfg.kl_coef * kl_weight) / n;
        if weight != 0.0 {
            ep.trace.accumulate_grad(theta, weight, &mut grad);
        }
    }
    stats.clipped_fraction = clipped as f64 / n;
    stats.grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    (grad, stats)
}

/// One gradient-ascent step of size `lr` on the logits.
pub fn policy_update<P: Policy + ?Sized>(
    policy: &mut P,
    reference: &P,
    episodes: &[Episode],
    cfg: &UpdateConfig,
) -> Result<UpdateStats, NonFiniteGradient> {
    let (grad, stats) = surrogate_gradient(policy.theta(), reference.theta(), episodes, cfg);
    if let Some((index, &value)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(NonFiniteGradient {
            index,
            value,
            episodes: episodes.len(),
        });
    }
    for (t, g) in policy.theta_mut().iter_mut().zip(&grad) {
        *t += cfg.lr * g;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::trace::{full_mask, sample_bernoulli, sample_categorical};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Toy(Vec<f64>);

    impl Policy for Toy {
        fn theta(&self) -> &[f64] {
            &self.0
        }
        fn theta_mut(&mut self) -> &mut [f64] {
            &mut self.0
        }
        fn slots(&self) -> Vec<super::super::Slot> {
            Vec::new()
        }
    }

    fn toy_trace(theta: &[f64], seed: u64) -> Trace {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Trace::default();
        sample_categorical(theta, &[0], 3, full_mask(3), &mut rng, &mut t);
        sample_bernoulli(theta, 3, &mut rng, &mut t);
        t
    }

    #[test]
    fn zero_advantage_without_kl_is_a_no_op() {
        let mut p = Toy(vec![0.2, -0.1, 0.4, 1.0]);
        let reference = Toy(vec![0.0; 4]);
        let eps: Vec<Episode> = (0..5)
            .map(|s| Episode::new(&p, toy_trace(&p.0, s), 0.0))
            .collect();
        let before = p.0.clone();
        let cfg = UpdateConfig {
            kl_coef: 0.0,
            ..UpdateConfig::default()
        };
        policy_update(&mut p, &reference, &eps, &cfg).unwrap();
        assert_eq!(p.0, before);
    }

    #[test]
    fn positive_advantage_raises_logprob() {
        let mut p = Toy(vec![0.2, -0.1, 0.4, 1.0]);
        let reference = Toy(p.0.clone());
        let trace = toy_trace(&p.0, 3);
        let before = trace.logprob(&p.0);
        let ep = Episode::new(&p, trace.clone(), 1.0);
        let stats = policy_update(&mut p, &reference, &[ep], &UpdateConfig::default()).unwrap();
        assert!(trace.logprob(&p.0) > before);
        // first inner step: ratio is exactly 1, nothing clipped, KL is 0
        assert_eq!(stats.clipped_fraction, 0.0);
        assert_eq!(stats.mean_kl, 0.0);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_at_reference() {
        for (lp, r) in [(-1.0, -1.0), (-3.0, -0.5), (-0.2, -4.0)] {
            let k = kl_k3(lp, r);
            assert!(k >= 0.0);
            assert_eq!(k == 0.0, lp == r);
        }
    }

    #[test]
    fn non_finite_gradient_is_reported() {
        let mut p = Toy(vec![0.0, 0.0, 0.0, 0.0]);
        let reference = Toy(vec![0.0; 4]);
        let mut ep = Episode::new(&p, toy_trace(&p.0, 1), f64::NAN);
        ep.old_logprob = 0.0;
        let err = policy_update(&mut p, &reference, &[ep], &UpdateConfig::default()).unwrap_err();
        assert_eq!(err.episodes, 1);
    }
}
