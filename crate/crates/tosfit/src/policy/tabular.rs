//! Softmax policy over an enumerated domain.

use super::{GradAccumulator, Policy, PolicyKind};
use crate::error::{Error, Result};
use rand::Rng;

/// `pi_x = exp(logit_x) / sum_z exp(logit_z)` over arms `0..n`.
///
/// Probabilities are invariant to adding a constant to all logits, and the
/// log-probability gradient is the classic `e_x - pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    logits: Vec<f64>,
}

impl TabularPolicy {
    /// Uniform policy (all-zero logits).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "domain must have at least one arm");
        Self { logits: vec![0.0; n] }
    }

    pub fn from_logits(logits: Vec<f64>) -> Self {
        assert!(!logits.is_empty());
        Self { logits }
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    fn log_normalizer(&self) -> f64 {
        let m = self.logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.logits.iter().map(|l| (l - m).exp()).sum();
        m + sum.ln()
    }

    pub fn probs(&self) -> Vec<f64> {
        let z = self.log_normalizer();
        self.logits.iter().map(|l| (l - z).exp()).collect()
    }
}

impl Policy for TabularPolicy {
    type Point = usize;

    fn kind(&self) -> PolicyKind {
        PolicyKind::Tabular
    }

    fn param_len(&self) -> usize {
        self.logits.len()
    }

    fn params(&self) -> &[f64] {
        &self.logits
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    fn header_dims(&self) -> Vec<u32> {
        vec![self.logits.len() as u32]
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let probs = self.probs();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    fn logprob(&self, x: &usize) -> Result<f64> {
        let logit = *self
            .logits
            .get(*x)
            .ok_or_else(|| Error::Domain(format!("arm {x} outside domain of size {}", self.len())))?;
        Ok(logit - self.log_normalizer())
    }

    fn grad_logprob(&self, x: &usize, weight: f64, acc: &mut GradAccumulator) -> Result<()> {
        if *x >= self.len() {
            return Err(Error::Domain(format!("arm {x} outside domain of size {}", self.len())));
        }
        let probs = self.probs();
        for (i, p) in probs.iter().enumerate() {
            let indicator = if i == *x { 1.0 } else { 0.0 };
            acc.add(i, weight * (indicator - p));
        }
        Ok(())
    }

    fn entropy(&self) -> Option<f64> {
        let probs = self.probs();
        Some(probs.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{apply_step, sample_batch};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn uniform_sampling_frequencies() {
        let p = TabularPolicy::new(4);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let draws = sample_batch(&p, &mut rng, 40_000);
        for arm in 0..4 {
            let freq = draws.iter().filter(|&&x| x == arm).count() as f64 / 40_000.0;
            assert!((freq - 0.25).abs() < 0.01, "arm {arm} frequency {freq}");
        }
    }

    #[test]
    fn saturated_softmax_is_nearly_deterministic() {
        let p = TabularPolicy::from_logits(vec![20.0, 0.0, 0.0, 0.0]);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let draws = sample_batch(&p, &mut rng, 100_000);
        let modal = draws.iter().filter(|&&x| x == 0).count() as f64 / 100_000.0;
        assert!(modal > 0.999, "modal frequency {modal}");
    }

    #[test]
    fn logprob_uniform() {
        let p = TabularPolicy::new(8);
        let lp = p.logprob(&3).unwrap();
        assert!((lp + (8f64).ln()).abs() < 1e-12);
        assert!((lp + 2.07944).abs() < 1e-5);
    }

    #[test]
    fn probabilities_sum_to_one_and_shift_invariant() {
        let p = TabularPolicy::from_logits(vec![0.3, -1.2, 2.0, 0.0, 0.5]);
        let total: f64 = p.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let shifted = TabularPolicy::from_logits(p.params().iter().map(|l| l + 123.4).collect());
        for (a, b) in p.probs().iter().zip(shifted.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let p = TabularPolicy::new(3);
        assert!(p.logprob(&3).is_err());
        let mut acc = p.grad_buffer();
        assert!(p.grad_logprob(&7, 1.0, &mut acc).is_err());
    }

    #[test]
    fn gradient_is_onehot_minus_probs() {
        let p = TabularPolicy::from_logits(vec![0.4, -0.3, 1.1]);
        let probs = p.probs();
        let mut acc = p.grad_buffer();
        p.grad_logprob(&2, 1.0, &mut acc).unwrap();
        for i in 0..3 {
            let expected = if i == 2 { 1.0 - probs[i] } else { -probs[i] };
            assert!((acc.as_slice()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weight_accumulates_nothing() {
        let p = TabularPolicy::from_logits(vec![0.4, -0.3, 1.1]);
        let mut acc = p.grad_buffer();
        p.grad_logprob(&0, 0.0, &mut acc).unwrap();
        assert!(acc.as_slice().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn repeated_ascent_concentrates_on_target() {
        let mut p = TabularPolicy::new(3);
        let mut last = p.probs()[0];
        for _ in 0..200 {
            let mut acc = p.grad_buffer();
            p.grad_logprob(&0, 1.0, &mut acc).unwrap();
            apply_step(&mut p, &mut acc, 0.5);
            let now = p.probs()[0];
            assert!(now >= last - 1e-12, "pi_0 decreased: {last} -> {now}");
            last = now;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn entropy_of_uniform() {
        let p = TabularPolicy::new(8);
        assert!((p.entropy().unwrap() - (8f64).ln()).abs() < 1e-12);
    }
}
