//! Prefix-conditioned autoregressive policy over fixed-length token
//! sequences.
//!
//! The per-position conditionals come from a two-layer map of the prefix:
//! the token history is encoded as a concatenation of one-hot slots
//! (zero-padded to the full length), passed through one tanh hidden layer,
//! and projected to one logit per vocabulary entry. Sequences have a fixed
//! length and no stop token. The model is small enough to validate against
//! finite differences exactly, yet can overfit any single sequence, which
//! is all the fine-tuning loop requires.

use super::{GradAccumulator, Policy, PolicyKind};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

pub const DEFAULT_HIDDEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SequencePolicy {
    vocab: usize,
    len: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl SequencePolicy {
    /// Zero-initialized model: every conditional is exactly uniform.
    pub fn new(vocab: usize, len: usize) -> Self {
        Self::with_hidden(vocab, len, DEFAULT_HIDDEN)
    }

    pub fn with_hidden(vocab: usize, len: usize, hidden: usize) -> Self {
        assert!((2..=256).contains(&vocab), "vocabulary must be in 2..=256");
        assert!(len >= 1 && hidden >= 1);
        let input = vocab * len;
        let count = hidden * input + hidden + vocab * hidden + vocab;
        Self { vocab, len, hidden, params: vec![0.0; count] }
    }

    /// Perturbs all parameters with independent `N(0, std^2)` noise,
    /// giving near-uniform conditionals for small `std`.
    pub fn init_gaussian<R: Rng>(&mut self, std: f64, rng: &mut R) {
        for p in &mut self.params {
            *p = std * rng.sample::<f64, _>(StandardNormal);
        }
    }

    pub fn vocab(&self) -> usize {
        self.vocab
    }

    pub fn seq_len(&self) -> usize {
        self.len
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub(crate) fn from_raw(vocab: usize, len: usize, hidden: usize, params: Vec<f64>) -> Self {
        let mut p = Self::with_hidden(vocab, len, hidden);
        assert_eq!(p.params.len(), params.len());
        p.params = params;
        p
    }

    #[inline]
    fn w1_at(&self, h: usize, col: usize) -> f64 {
        self.params[h * self.vocab * self.len + col]
    }

    #[inline]
    fn b1_off(&self) -> usize {
        self.hidden * self.vocab * self.len
    }

    #[inline]
    fn w2_off(&self) -> usize {
        self.b1_off() + self.hidden
    }

    #[inline]
    fn b2_off(&self) -> usize {
        self.w2_off() + self.vocab * self.hidden
    }

    fn check_domain(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.len {
            return Err(Error::Domain(format!(
                "sequence length {} does not match policy length {}",
                x.len(),
                self.len
            )));
        }
        if let Some(t) = x.iter().find(|t| usize::from(**t) >= self.vocab) {
            return Err(Error::Domain(format!("token {t} outside vocabulary of size {}", self.vocab)));
        }
        Ok(())
    }

    /// Hidden activations and token log-probabilities for position `t`
    /// given `prefix[..t]`. The one-hot prefix encoding is sparse, so the
    /// first layer sums one weight column per filled slot.
    fn position_forward(&self, prefix: &[u8], t: usize) -> (Vec<f64>, Vec<f64>) {
        let v = self.vocab;
        let mut act = vec![0.0; self.hidden];
        for (h, a) in act.iter_mut().enumerate() {
            let mut pre = self.params[self.b1_off() + h];
            for (pos, &tok) in prefix[..t].iter().enumerate() {
                pre += self.w1_at(h, pos * v + usize::from(tok));
            }
            *a = pre.tanh();
        }
        let mut logits = vec![0.0; v];
        for (tok, logit) in logits.iter_mut().enumerate() {
            let mut s = self.params[self.b2_off() + tok];
            let row = self.w2_off() + tok * self.hidden;
            for (h, a) in act.iter().enumerate() {
                s += self.params[row + h] * a;
            }
            *logit = s;
        }
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        for l in &mut logits {
            *l -= z;
        }
        (act, logits)
    }
}

impl Policy for SequencePolicy {
    type Point = Vec<u8>;

    fn kind(&self) -> PolicyKind {
        PolicyKind::Sequence
    }

    fn param_len(&self) -> usize {
        self.params.len()
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn header_dims(&self) -> Vec<u32> {
        vec![self.vocab as u32, self.len as u32, self.hidden as u32]
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<u8> {
        let mut seq = Vec::with_capacity(self.len);
        for t in 0..self.len {
            let (_, logprobs) = self.position_forward(&seq, t);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = self.vocab - 1;
            for (tok, lp) in logprobs.iter().enumerate() {
                acc += lp.exp();
                if u < acc {
                    chosen = tok;
                    break;
                }
            }
            seq.push(chosen as u8);
        }
        seq
    }

    fn logprob(&self, x: &Vec<u8>) -> Result<f64> {
        self.check_domain(x)?;
        let mut total = 0.0;
        for t in 0..self.len {
            let (_, logprobs) = self.position_forward(x, t);
            total += logprobs[usize::from(x[t])];
        }
        Ok(total)
    }

    fn grad_logprob(&self, x: &Vec<u8>, weight: f64, acc: &mut GradAccumulator) -> Result<()> {
        self.check_domain(x)?;
        if weight == 0.0 {
            return Ok(());
        }
        let v = self.vocab;
        for t in 0..self.len {
            let (act, logprobs) = self.position_forward(x, t);
            let chosen = usize::from(x[t]);
            // d logprob / d logits = e_chosen - softmax(logits)
            let mut dlogits = vec![0.0; v];
            for (tok, d) in dlogits.iter_mut().enumerate() {
                let p = logprobs[tok].exp();
                *d = weight * (if tok == chosen { 1.0 - p } else { -p });
            }
            let mut dact = vec![0.0; self.hidden];
            for (tok, &dl) in dlogits.iter().enumerate() {
                acc.add(self.b2_off() + tok, dl);
                let row = self.w2_off() + tok * self.hidden;
                for (h, a) in act.iter().enumerate() {
                    acc.add(row + h, dl * a);
                    dact[h] += dl * self.params[row + h];
                }
            }
            let input = v * self.len;
            for (h, (&da, &a)) in dact.iter().zip(&act).enumerate() {
                let dpre = da * (1.0 - a * a);
                acc.add(self.b1_off() + h, dpre);
                for (pos, &tok) in x[..t].iter().enumerate() {
                    acc.add(h * input + pos * v + usize::from(tok), dpre);
                }
            }
        }
        Ok(())
    }
}

/// All sequences of the given shape, in lexicographic order. Intended for
/// enumeration-based tests; the caller is responsible for keeping
/// `vocab^len` small.
pub fn all_sequences(vocab: usize, len: usize) -> Vec<Vec<u8>> {
    let total = (vocab as u64).pow(len as u32) as usize;
    let mut out = Vec::with_capacity(total);
    let mut seq = vec![0u8; len];
    loop {
        out.push(seq.clone());
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if usize::from(seq[pos]) + 1 < vocab {
                seq[pos] += 1;
                break;
            }
            seq[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::sample_batch;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_params_give_uniform_product() {
        let p = SequencePolicy::new(2, 3);
        let lp = p.logprob(&vec![0, 1, 0]).unwrap();
        assert!((lp + 3.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn logprobs_normalize_over_enumerated_domain() {
        let mut p = SequencePolicy::new(2, 3);
        p.init_gaussian(0.5, &mut ChaCha12Rng::seed_from_u64(2));
        let total: f64 = all_sequences(2, 3).iter().map(|s| p.logprob(s).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-8, "total mass {total}");
    }

    #[test]
    fn sampling_matches_probabilities() {
        let mut p = SequencePolicy::new(2, 2);
        p.init_gaussian(0.8, &mut ChaCha12Rng::seed_from_u64(5));
        let n = 100_000usize;
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let draws = sample_batch(&p, &mut rng, n);
        for seq in all_sequences(2, 2) {
            let prob = p.logprob(&seq).unwrap().exp();
            let freq = draws.iter().filter(|d| **d == seq).count() as f64 / n as f64;
            let se = (prob * (1.0 - prob) / n as f64).sqrt();
            assert!(
                (freq - prob).abs() <= 4.0 * se + 1e-9,
                "seq {seq:?}: freq {freq} prob {prob}"
            );
        }
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let mut p = SequencePolicy::new(3, 4);
        p.init_gaussian(0.3, &mut ChaCha12Rng::seed_from_u64(6));
        let a = sample_batch(&p, &mut ChaCha12Rng::seed_from_u64(42), 20);
        let b = sample_batch(&p, &mut ChaCha12Rng::seed_from_u64(42), 20);
        assert_eq!(a, b);
    }

    #[test]
    fn gradient_matches_directional_finite_difference() {
        let mut p = SequencePolicy::with_hidden(2, 3, 8);
        p.init_gaussian(0.4, &mut ChaCha12Rng::seed_from_u64(9));
        let x = vec![1u8, 0, 1];
        let mut acc = p.grad_buffer();
        p.grad_logprob(&x, 1.0, &mut acc).unwrap();
        let grad = acc.as_slice().to_vec();

        let mut dir_rng = ChaCha12Rng::seed_from_u64(100);
        let dir: Vec<f64> =
            (0..p.param_len()).map(|_| dir_rng.sample::<f64, _>(StandardNormal)).collect();
        let analytic: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();

        let step = 1e-5;
        let mut plus = p.clone();
        let mut minus = p.clone();
        for i in 0..p.param_len() {
            plus.params_mut()[i] += step * dir[i];
            minus.params_mut()[i] -= step * dir[i];
        }
        let numeric =
            (plus.logprob(&x).unwrap() - minus.logprob(&x).unwrap()) / (2.0 * step);
        assert!(
            (analytic - numeric).abs() <= 1e-4 * analytic.abs().max(1.0),
            "directional derivative {numeric} vs accumulated {analytic}"
        );
    }

    #[test]
    fn domain_violations_rejected() {
        let p = SequencePolicy::new(2, 3);
        assert!(p.logprob(&vec![0, 1]).is_err());
        assert!(p.logprob(&vec![0, 1, 2]).is_err());
    }

    #[test]
    fn enumeration_order_and_count() {
        let seqs = all_sequences(2, 3);
        assert_eq!(seqs.len(), 8);
        assert_eq!(seqs[0], vec![0, 0, 0]);
        assert_eq!(seqs[7], vec![1, 1, 1]);
    }
}
