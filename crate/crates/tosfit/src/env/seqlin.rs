//! Binary-sequence environment with a linear reward in a signed bit
//! encoding — an enumeration-verifiable stand-in for generative-model
//! domains.

use super::{Environment, PriorKind, PriorSpec, PriorTarget, ENUM_CAP};
use crate::error::{Error, Result};
use crate::gp::FeatureVector;
use crate::linalg::dot;
use crate::policy::all_sequences;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

const SEED_SALT: u64 = 0x7365716c696e; // "seqlin"

/// Sequences of `len` binary tokens. The feature map is
/// `phi(x) = ((2 x_i - 1) / sqrt(len), 1) / sqrt(2)` — signed bits plus a
/// constant bias entry, unit norm by construction — and the reward is
/// `w^T phi(x)` for a hidden weight vector drawn at the environment seed.
#[derive(Debug, Clone)]
pub struct SequenceLinearEnv {
    len: usize,
    weights: Vec<f64>,
    noise_std: f64,
}

impl SequenceLinearEnv {
    pub fn new(len: usize, noise_std: f64, env_seed: u64) -> Result<Self> {
        if len == 0 {
            return Err(Error::Config("sequence length must be at least 1".into()));
        }
        if len >= 63 {
            return Err(Error::Config(format!("sequence length {len} is unreasonably large")));
        }
        if noise_std < 0.0 {
            return Err(Error::Config("noise standard deviation must be nonnegative".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(env_seed ^ SEED_SALT);
        let weights: Vec<f64> = (0..=len).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Self { len, weights, noise_std })
    }

    /// The default benchmark instance: length 12, so 4096 sequences.
    pub fn default_12(env_seed: u64) -> Self {
        Self::new(12, 0.0, env_seed).expect("static configuration is valid")
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vocab(&self) -> usize {
        2
    }

    fn check(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.len {
            return Err(Error::Domain(format!(
                "sequence length {} does not match environment length {}",
                x.len(),
                self.len
            )));
        }
        if x.iter().any(|&t| t > 1) {
            return Err(Error::Domain("tokens must be 0 or 1".into()));
        }
        Ok(())
    }

    /// Anchor sequence at the given reward quantile (by enumeration rank).
    fn anchor_at_quantile(&self, q: f64) -> Vec<u8> {
        let mut listed = self.enumerate().expect("default lengths stay under the cap");
        listed.sort_by(|a, b| a.2.total_cmp(&b.2));
        let idx = ((q * (listed.len() as f64 - 1.0)).round() as usize).min(listed.len() - 1);
        listed[idx].0.clone()
    }

    /// Pre-training target over sequences: independent bits that match an
    /// anchor with probability `1 - flip`. The biased prior anchors at the
    /// 80th reward percentile, the anti-biased prior at the 10th.
    pub fn prior_spec(&self, kind: PriorKind) -> PriorSpec {
        let flip = 0.12;
        let p_one = match kind {
            PriorKind::Uniform => vec![0.5; self.len],
            PriorKind::Biased => {
                let anchor = self.anchor_at_quantile(0.80);
                anchor.iter().map(|&b| if b == 1 { 1.0 - flip } else { flip }).collect()
            }
            PriorKind::AntiBiased => {
                let anchor = self.anchor_at_quantile(0.10);
                anchor.iter().map(|&b| if b == 1 { 1.0 - flip } else { flip }).collect()
            }
        };
        PriorSpec { kind, target: PriorTarget::BitProduct(p_one) }
    }
}

impl Environment for SequenceLinearEnv {
    type Point = Vec<u8>;

    fn dim(&self) -> usize {
        self.len + 1
    }

    fn features(&self, x: &Vec<u8>) -> FeatureVector {
        debug_assert!(self.check(x).is_ok());
        let scale = 1.0 / (2.0f64).sqrt();
        let bit_scale = scale / (self.len as f64).sqrt();
        let mut f = Vec::with_capacity(self.len + 1);
        for &b in x {
            f.push(if b == 1 { bit_scale } else { -bit_scale });
        }
        f.push(scale);
        FeatureVector(f)
    }

    fn reward(&self, x: &Vec<u8>) -> Result<f64> {
        self.check(x)?;
        Ok(dot(&self.weights, self.features(x).as_slice()))
    }

    fn observe<R: Rng>(&self, x: &Vec<u8>, rng: &mut R) -> Result<f64> {
        let r = self.reward(x)?;
        let noise: f64 =
            if self.noise_std > 0.0 { self.noise_std * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
        Ok(r + noise)
    }

    fn domain_size(&self) -> u64 {
        1u64 << self.len
    }

    fn enumerate(&self) -> Result<Vec<(Vec<u8>, FeatureVector, f64)>> {
        if self.domain_size() > ENUM_CAP {
            return Err(Error::Enumeration(format!(
                "domain of size {} exceeds the enumeration cap {ENUM_CAP}",
                self.domain_size()
            )));
        }
        Ok(all_sequences(2, self.len)
            .into_iter()
            .map(|seq| {
                let phi = self.features(&seq);
                let r = dot(&self.weights, phi.as_slice());
                (seq, phi, r)
            })
            .collect())
    }

    fn true_max(&self) -> f64 {
        // Linear in the signed bits: the maximizer sets each bit to the
        // sign of its weight.
        let best: Vec<u8> =
            self.weights[..self.len].iter().map(|&w| if w > 0.0 { 1u8 } else { 0u8 }).collect();
        self.reward(&best).expect("constructed point is in-domain")
    }
}
