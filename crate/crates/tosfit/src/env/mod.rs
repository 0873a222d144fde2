//! Synthetic reward environments with feature maps, plus the supervised
//! "pre-training" targets used to initialize policies.
//!
//! Rewards are realized once at construction from the environment seed (the
//! fixed-reward setting); observation noise, when enabled, is the only
//! stochastic part of an observation and is driven by the caller's RNG
//! stream.

mod bandit;
mod seqlin;

pub use bandit::FiniteGaussianBandit;
pub use seqlin::SequenceLinearEnv;

use crate::error::{Error, Result};
use crate::gp::FeatureVector;
use crate::point::Point;
use crate::policy::{apply_step, GradAccumulator, Policy, SequencePolicy, TabularPolicy};
use rand::Rng;

/// Hard cap on exhaustive enumeration.
pub const ENUM_CAP: u64 = 1 << 20;

pub trait Environment {
    type Point: Point;

    /// Feature dimension of the reward model.
    fn dim(&self) -> usize;

    /// Feature map `phi(x)`. Points must belong to the environment domain.
    fn features(&self, x: &Self::Point) -> FeatureVector;

    /// Noiseless reward of `x`.
    fn reward(&self, x: &Self::Point) -> Result<f64>;

    /// One observation: reward plus (possibly zero-variance) Gaussian noise.
    fn observe<R: Rng>(&self, x: &Self::Point, rng: &mut R) -> Result<f64>;

    fn domain_size(&self) -> u64;

    /// Exhaustive `(x, phi(x), reward)` listing; errors above [`ENUM_CAP`].
    fn enumerate(&self) -> Result<Vec<(Self::Point, FeatureVector, f64)>>;

    /// Ground-truth maximum reward, for regret accounting.
    fn true_max(&self) -> f64;
}

/// Which pre-training prior to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    /// Flat over the domain.
    Uniform,
    /// Concentrated on a good-but-not-optimal region ("strong" prior).
    Biased,
    /// Concentrated on a low-reward region ("weak" prior).
    AntiBiased,
}

/// The target distribution a policy is pre-fit to.
#[derive(Debug, Clone)]
pub enum PriorTarget {
    /// Explicit probabilities over an enumerated domain.
    Categorical(Vec<f64>),
    /// Independent per-position Bernoulli over binary sequences;
    /// `p_one[i]` is the probability that position `i` is token 1.
    BitProduct(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct PriorSpec {
    pub kind: PriorKind,
    pub target: PriorTarget,
}

/// Outcome of a pre-training fit. `tv` is the total-variation distance to
/// the target where the domain is cheap to enumerate; a fit that misses the
/// 0.05 band is flagged, not fatal.
#[derive(Debug, Clone, Copy)]
pub struct PretrainReport {
    pub iters: usize,
    pub tv: Option<f64>,
    pub converged: bool,
}

pub const PRETRAIN_TV_BAND: f64 = 0.05;

/// Fits a tabular policy to explicit target probabilities by exact
/// cross-entropy ascent (`d/d logits = target - pi`).
pub fn pretrain_tabular(
    policy: &mut TabularPolicy,
    target: &[f64],
    iters: usize,
) -> Result<PretrainReport> {
    if target.len() != policy.len() {
        return Err(Error::Shape { expected: policy.len(), got: target.len() });
    }
    let lr = 1.0;
    for _ in 0..iters {
        let probs = policy.probs();
        let mut acc = GradAccumulator::zeros(policy.param_len());
        for i in 0..target.len() {
            acc.add(i, target[i] - probs[i]);
        }
        apply_step(policy, &mut acc, lr);
    }
    let probs = policy.probs();
    let tv = 0.5 * probs.iter().zip(target).map(|(p, t)| (p - t).abs()).sum::<f64>();
    Ok(PretrainReport { iters, tv: Some(tv), converged: tv <= PRETRAIN_TV_BAND })
}

/// Fits a sequence policy to a bit-product target by sampled
/// log-likelihood ascent with a decaying learning rate.
///
/// The policy must not sit exactly at the all-zero saddle (where the hidden
/// pathway receives no gradient); callers normally apply
/// [`SequencePolicy::init_gaussian`] with a small standard deviation first.
pub fn pretrain_sequence<R: Rng>(
    policy: &mut SequencePolicy,
    p_one: &[f64],
    iters: usize,
    rng: &mut R,
) -> Result<PretrainReport> {
    if p_one.len() != policy.seq_len() {
        return Err(Error::Shape { expected: policy.seq_len(), got: p_one.len() });
    }
    if policy.vocab() != 2 {
        return Err(Error::Config("bit-product targets require a binary vocabulary".into()));
    }
    let batch = 64;
    let lr0 = 0.1;
    for it in 0..iters {
        let mut acc = policy.grad_buffer();
        for _ in 0..batch {
            let seq: Vec<u8> =
                p_one.iter().map(|&p| if rng.random::<f64>() < p { 1u8 } else { 0u8 }).collect();
            policy.grad_logprob(&seq, 1.0 / batch as f64, &mut acc)?;
        }
        // Linear decay to zero averages out the sampling noise by the end
        // of the schedule.
        let lr = lr0 * (1.0 - it as f64 / iters as f64);
        apply_step(policy, &mut acc, lr);
    }
    let tv = if (policy.vocab() as u64).pow(policy.seq_len() as u32) <= 1 << 13 {
        Some(bit_product_tv(policy, p_one))
    } else {
        None
    };
    Ok(PretrainReport { iters, tv, converged: tv.is_none_or(|t| t <= PRETRAIN_TV_BAND) })
}

fn bit_product_tv(policy: &SequencePolicy, p_one: &[f64]) -> f64 {
    let mut acc = 0.0;
    for seq in crate::policy::all_sequences(policy.vocab(), policy.seq_len()) {
        let model = policy.logprob(&seq).expect("enumerated point is in-domain").exp();
        let target: f64 = seq
            .iter()
            .zip(p_one)
            .map(|(&b, &p)| if b == 1 { p } else { 1.0 - p })
            .product();
        acc += (model - target).abs();
    }
    0.5 * acc
}

/// Exact mass a bit-product target assigns to a set of sequences.
pub fn bit_product_mass(p_one: &[f64], set: &[Vec<u8>]) -> f64 {
    set.iter()
        .map(|seq| {
            seq.iter()
                .zip(p_one)
                .map(|(&b, &p)| if b == 1 { p } else { 1.0 - p })
                .product::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_target_keeps_logits_flat() {
        let mut policy = TabularPolicy::new(4);
        let report = pretrain_tabular(&mut policy, &[0.25; 4], 300).unwrap();
        assert!(report.converged);
        let logits = policy.params();
        for l in logits {
            assert!((l - logits[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn biased_target_is_matched_closely() {
        let mut policy = TabularPolicy::new(4);
        let target = [0.7, 0.1, 0.1, 0.1];
        let report = pretrain_tabular(&mut policy, &target, 2000).unwrap();
        assert!(report.converged, "tv = {:?}", report.tv);
        for (p, t) in policy.probs().iter().zip(&target) {
            assert!((p - t).abs() < 0.02, "fitted {p} target {t}");
        }
    }

    #[test]
    fn target_length_mismatch_rejected() {
        let mut policy = TabularPolicy::new(4);
        assert!(pretrain_tabular(&mut policy, &[0.5, 0.5], 10).is_err());
    }

    #[test]
    fn sequence_fit_reaches_tv_band() {
        use rand::SeedableRng;
        let mut policy = SequencePolicy::new(2, 6);
        let p_one = vec![0.9, 0.1, 0.8, 0.2, 0.9, 0.5];
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        policy.init_gaussian(0.05, &mut rng);
        let report = pretrain_sequence(&mut policy, &p_one, 2500, &mut rng).unwrap();
        assert!(
            report.converged,
            "sequence pre-training missed the band: tv = {:?}",
            report.tv
        );
    }
}
