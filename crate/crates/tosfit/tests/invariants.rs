//! Property-based invariants spanning module boundaries.

use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use tosfit::gp::{FeatureVector, GpState};
use tosfit::learner::rloo_standardized;
use tosfit::oracle;
use tosfit::policy::{Policy, TabularPolicy};
use tosfit::vbos::{v, vbos_solve, MomentField};

fn random_features(seed: u64, d: usize, s: usize) -> Vec<FeatureVector> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..s)
        .map(|_| {
            let mut f: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in &mut f {
                *x /= n;
            }
            FeatureVector(f)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The tracked inverse times the reconstructed matrix is the identity.
    #[test]
    fn smw_inverse_consistency(seed in 0u64..1000, d in 1usize..=16, s in 0usize..=200) {
        let sigma_nar = 0.1 + (seed % 7) as f64 * 0.1;
        let feats = random_features(seed, d, s);
        let mut gp = GpState::new(d, sigma_nar, 1.0).unwrap();
        for f in &feats {
            gp.update(f, 0.3).unwrap();
        }
        // Psi rebuilt from the raw features, not from the state.
        let mut psi = vec![vec![0.0; d]; d];
        for i in 0..d {
            psi[i][i] = sigma_nar * sigma_nar;
        }
        for f in &feats {
            for i in 0..d {
                for j in 0..d {
                    psi[i][j] += f.0[i] * f.0[j];
                }
            }
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut prod = 0.0;
                for k in 0..d {
                    prod += gp.psi_inv().at(i, k) * psi[k][j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod - expected).abs());
            }
        }
        prop_assert!(worst < 1e-7, "max |psi_inv psi - I| = {worst}");
    }

    /// The solver's output is the closed form through the link and sums
    /// to one.
    #[test]
    fn solution_matches_closed_form(seed in 0u64..1000, n in 2usize..=32) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let field = MomentField::new(
            (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            (0..n).map(|_| rng.random_range(0.05..2.0)).collect(),
        ).unwrap();
        let sol = vbos_solve(&field).unwrap();
        prop_assert!(sol.defined_kappa);
        let total: f64 = sol.pi.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for i in 0..n {
            let direct = v((field.mu[i] - sol.kappa_star) / field.sigma[i]);
            let scaled = direct / total.max(1e-300);
            prop_assert!((sol.pi[i] - scaled).abs() < 1e-8,
                "entry {i}: {} vs closed form {scaled}", sol.pi[i]);
        }
    }

    /// Standardized leave-one-out advantages equal the group-relative form
    /// and are invariant to constant reward shifts.
    #[test]
    fn rloo_matches_group_relative(seed in 0u64..1000, b in 2usize..=32, shift in -10.0f64..10.0) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let rewards: Vec<f64> = (0..b).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ours = rloo_standardized(&rewards).unwrap();
        let mean = rewards.iter().sum::<f64>() / b as f64;
        let pop_std = (rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / b as f64).sqrt();
        prop_assume!(pop_std > 1e-6);
        for (o, r) in ours.iter().zip(&rewards) {
            prop_assert!((o - (r - mean) / pop_std).abs() < 1e-9);
        }
        let shifted: Vec<f64> = rewards.iter().map(|r| r + shift).collect();
        for (a, b) in ours.iter().zip(rloo_standardized(&shifted).unwrap()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    /// The softmax log-gradient identity holds against finite differences.
    #[test]
    fn tabular_gradient_identity(seed in 0u64..1000, n in 2usize..=8) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let logits: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let policy = TabularPolicy::from_logits(logits.clone());
        let x = rng.random_range(0..n);
        let mut acc = policy.grad_buffer();
        policy.grad_logprob(&x, 1.0, &mut acc).unwrap();
        let mut logprob = |params: &[f64]| {
            TabularPolicy::from_logits(params.to_vec()).logprob(&x).unwrap()
        };
        let fd = oracle::finite_diff_grad(&mut logprob, &logits, 1e-6);
        for i in 0..n {
            prop_assert!((acc.as_slice()[i] - fd[i]).abs() < 1e-6);
        }
    }
}

/// Perturbing the closed-form likelihood maximizers never improves the
/// exact marginal log-likelihood.
#[test]
fn mlm_first_order_optimality() {
    for seed in 0..10u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let d = rng.random_range(1..=4usize);
        let s = rng.random_range(3..=20usize);
        let sigma_nar = rng.random_range(0.3..1.0f64);
        let feats = random_features(seed ^ 0x9e37, d, s);
        let mut gp = GpState::new(d, sigma_nar, 1.0).unwrap();
        let mut obs = Vec::new();
        for f in feats {
            let y: f64 = rng.sample::<f64, _>(StandardNormal) * 0.7 + 0.2;
            gp.update(&f, y).unwrap();
            obs.push((f, y));
        }
        let (nu, lambda) = gp.mlm().unwrap();
        let base = oracle::exact_loglik(&obs, nu, lambda, sigma_nar).unwrap();
        for (dn, dl) in [(1.01, 1.0), (0.99, 1.0), (1.0, 1.01), (1.0, 0.99)] {
            let perturbed_nu = if nu.abs() > 1e-9 { nu * dn } else { nu + (dn - 1.0) };
            let perturbed =
                oracle::exact_loglik(&obs, perturbed_nu, lambda * dl, sigma_nar).unwrap();
            assert!(
                perturbed <= base + 1e-9,
                "seed {seed}: perturbation ({dn}, {dl}) improved the likelihood by {}",
                perturbed - base
            );
        }
    }
}

/// Well-specified recovery: a GP sharing the environment's feature map
/// reproduces every reward after enough noiseless observations.
#[test]
fn gp_recovers_linear_rewards_exactly() {
    use tosfit::env::{Environment, SequenceLinearEnv};
    let env = SequenceLinearEnv::new(8, 0.0, 3).unwrap();
    let listed = env.enumerate().unwrap();
    let mut gp = GpState::new(env.dim(), 0.01, 1.0).unwrap();
    // Repeated noiseless passes shrink the ridge-induced bias.
    for _ in 0..16 {
        for (_, phi, r) in &listed {
            gp.update(phi, *r).unwrap();
        }
    }
    let mut worst = 0.0f64;
    for (_, phi, r) in &listed {
        let m = gp.posterior(phi).unwrap();
        worst = worst.max((m.mu - r).abs());
    }
    assert!(worst < 1e-6, "max recovery error {worst}");
}
