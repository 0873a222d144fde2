//! Finite linear-Gaussian bandit: `n` arms with unit-sphere features and a
//! hidden weight vector drawn once at construction.

use super::{Environment, PriorKind, PriorSpec, PriorTarget, ENUM_CAP};
use crate::error::{Error, Result};
use crate::gp::FeatureVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

// Seed salt so bandit and sequence environments with the same seed do not
// share their weight draws.
const SEED_SALT: u64 = 0x62616e646974; // "bandit"

#[derive(Debug, Clone)]
pub struct FiniteGaussianBandit {
    features: Vec<FeatureVector>,
    rewards: Vec<f64>,
    noise_std: f64,
    dim: usize,
}

impl FiniteGaussianBandit {
    /// `reward_i = offset + w^T phi_i` with `w ~ N(0, I_d)` and features
    /// uniform on the unit sphere, both drawn from `env_seed`.
    pub fn new(n: usize, d: usize, offset: f64, noise_std: f64, env_seed: u64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Config("bandit needs at least one arm and one feature".into()));
        }
        if n as u64 > ENUM_CAP {
            return Err(Error::Config(format!("arm count {n} exceeds enumeration cap")));
        }
        if noise_std < 0.0 {
            return Err(Error::Config("noise standard deviation must be nonnegative".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(env_seed ^ SEED_SALT);
        let weights: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let mut features = Vec::with_capacity(n);
        let mut rewards = Vec::with_capacity(n);
        for _ in 0..n {
            let mut f: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = crate::linalg::norm2(&f);
            for v in &mut f {
                *v /= norm;
            }
            let r = offset + crate::linalg::dot(&weights, &f);
            features.push(FeatureVector(f));
            rewards.push(r);
        }
        Ok(Self { features, rewards, noise_std, dim: d })
    }

    /// The default benchmark instance: 64 arms over 8 features.
    pub fn default_64(env_seed: u64) -> Self {
        Self::new(64, 8, 0.0, 0.0, env_seed).expect("static configuration is valid")
    }

    pub fn arm_count(&self) -> usize {
        self.rewards.len()
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.rewards.len() {
            return Err(Error::Domain(format!("arm {x} outside domain of size {}", self.rewards.len())));
        }
        Ok(())
    }

    /// Pre-training target over arms. The biased prior spreads 90% of its
    /// mass over arms ranked between the 55th and 95th reward percentile
    /// (good, but excluding the very top); the anti-biased prior spreads
    /// 90% over the bottom 40%. The remaining 10% is uniform.
    pub fn prior_spec(&self, kind: PriorKind) -> PriorSpec {
        let n = self.rewards.len();
        let target = match kind {
            PriorKind::Uniform => vec![1.0 / n as f64; n],
            PriorKind::Biased => self.region_target(0.55, 0.95),
            PriorKind::AntiBiased => self.region_target(0.0, 0.40),
        };
        PriorSpec { kind, target: PriorTarget::Categorical(target) }
    }

    fn region_target(&self, lo_q: f64, hi_q: f64) -> Vec<f64> {
        let n = self.rewards.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.rewards[a].total_cmp(&self.rewards[b]));
        let lo = ((lo_q * n as f64) as usize).min(n - 1);
        let hi = ((hi_q * n as f64) as usize).clamp(lo + 1, n);
        let region: Vec<usize> = order[lo..hi].to_vec();
        let mut target = vec![0.1 / n as f64; n];
        for &i in &region {
            target[i] += 0.9 / region.len() as f64;
        }
        target
    }
}

impl Environment for FiniteGaussianBandit {
    type Point = usize;

    fn dim(&self) -> usize {
        self.dim
    }

    fn features(&self, x: &usize) -> FeatureVector {
        self.features[*x].clone()
    }

    fn reward(&self, x: &usize) -> Result<f64> {
        self.check(*x)?;
        Ok(self.rewards[*x])
    }

    fn observe<R: Rng>(&self, x: &usize, rng: &mut R) -> Result<f64> {
        self.check(*x)?;
        let noise: f64 =
            if self.noise_std > 0.0 { self.noise_std * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
        Ok(self.rewards[*x] + noise)
    }

    fn domain_size(&self) -> u64 {
        self.rewards.len() as u64
    }

    fn enumerate(&self) -> Result<Vec<(usize, FeatureVector, f64)>> {
        Ok((0..self.rewards.len())
            .map(|i| (i, self.features[i].clone(), self.rewards[i]))
            .collect())
    }

    fn true_max(&self) -> f64 {
        self.rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}
