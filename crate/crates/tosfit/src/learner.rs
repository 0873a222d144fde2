//! Score-trick gradient estimation of the variational objective, with
//! leave-one-out baselines and standardized advantages.
//!
//! One gradient step samples a batch from the policy, turns posterior
//! moments into per-sample weights, baselines and standardizes them, and
//! applies `sum_i (a_i / B) * d ln pi(x_i) / d theta` as a vanilla ascent
//! step. The weight depends on the objective:
//!
//! * variational (default): the pseudo reward
//!   `mu_x - v^-1(pi_x) * sigma_x` — ascent pushes probability up exactly
//!   where the policy's implied mean underestimates the posterior mean;
//! * actor-critic: `mu_x`;
//! * soft actor-critic: `mu_x - alpha * ln pi_x` (the extra constant from
//!   differentiating through the entropy term is absorbed by the baseline).

use crate::error::{Error, Result};
use crate::gp::{FeatureVector, GpState};
use crate::policy::{sample_batch, apply_step, Policy};
use crate::vbos::{v_inv_clamped, MomentField, PROB_CEIL, PROB_FLOOR};
use rand::Rng;

/// Guard on the standardization denominator: batches with (numerically)
/// constant weights produce a zero gradient instead of a blow-up.
pub const STD_EPS: f64 = 1e-8;

/// Objective variant driving the per-sample weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Entropy-adaptive upper-confidence objective.
    Vbos,
    /// Posterior-mean maximization.
    ActorCritic,
    /// Posterior mean plus `alpha` times policy entropy.
    SoftActorCritic { alpha: f64 },
}

impl Objective {
    fn weight(&self, mu: f64, sigma: f64, pi: f64) -> f64 {
        match self {
            Objective::Vbos => mu - v_inv_clamped(pi) * sigma,
            Objective::ActorCritic => mu,
            Objective::SoftActorCritic { alpha } => {
                mu - alpha * pi.clamp(PROB_FLOOR, PROB_CEIL).ln()
            }
        }
    }
}

/// A sampled batch with everything the estimator needs: log-probabilities,
/// posterior moments and the pseudo reward `mu - v^-1(pi) * sigma`.
#[derive(Debug, Clone)]
pub struct PseudoRewardBatch<P> {
    pub points: Vec<P>,
    pub logprobs: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub pseudo: Vec<f64>,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    /// Batch mean of the pseudo reward.
    pub mean_pseudo: f64,
    /// Batch mean of the optimistic surrogate `mu + sqrt(-2 ln pi) * sigma`,
    /// a Monte-Carlo estimate of the objective at the current policy.
    pub mean_surrogate: f64,
    /// Standardization denominator (zero for constant batches).
    pub advantage_std: f64,
    pub mean_logprob: f64,
}

/// Queries posterior moments and policy probabilities for a batch of points
/// and assembles the pseudo rewards.
pub fn pseudo_rewards<P: Policy>(
    points: Vec<P::Point>,
    policy: &P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
) -> Result<PseudoRewardBatch<P::Point>> {
    if points.len() < 2 {
        return Err(Error::Input(format!("batch size must be at least 2, got {}", points.len())));
    }
    let mut logprobs = Vec::with_capacity(points.len());
    let mut mu = Vec::with_capacity(points.len());
    let mut sigma = Vec::with_capacity(points.len());
    let mut pseudo = Vec::with_capacity(points.len());
    for x in &points {
        let lp = policy.logprob(x)?;
        let moment = gp.posterior(&features(x))?;
        let pi = lp.exp().clamp(PROB_FLOOR, PROB_CEIL);
        logprobs.push(lp);
        mu.push(moment.mu);
        sigma.push(moment.sigma);
        pseudo.push(Objective::Vbos.weight(moment.mu, moment.sigma, pi));
    }
    Ok(PseudoRewardBatch { points, logprobs, mu, sigma, pseudo })
}

/// Leave-one-out advantages `r_i - mean_{j != i} r_j` (unstandardized).
pub fn rloo(rewards: &[f64]) -> Result<Vec<f64>> {
    let b = rewards.len();
    if b < 2 {
        return Err(Error::Input(format!("leave-one-out baseline needs at least 2 samples, got {b}")));
    }
    let sum: f64 = rewards.iter().sum();
    Ok(rewards.iter().map(|&r| r - (sum - r) / (b as f64 - 1.0)).collect())
}

/// Leave-one-out advantages divided by their empirical second moment
/// `sqrt(mean_h rloo_h^2)`. Constant batches (denominator below
/// [`STD_EPS`]) yield all zeros. Numerically identical to the
/// group-relative form `(r_i - mean) / population std`.
pub fn rloo_standardized(rewards: &[f64]) -> Result<Vec<f64>> {
    let raw = rloo(rewards)?;
    let second_moment = raw.iter().map(|a| a * a).sum::<f64>() / raw.len() as f64;
    let denom = second_moment.sqrt();
    if denom < STD_EPS {
        return Ok(vec![0.0; raw.len()]);
    }
    Ok(raw.into_iter().map(|a| a / denom).collect())
}

fn check_objective(objective: Objective) -> Result<()> {
    if let Objective::SoftActorCritic { alpha } = objective {
        if !(alpha > 0.0) {
            return Err(Error::Config(format!("entropy coefficient must be positive, got {alpha}")));
        }
    }
    Ok(())
}

/// Gradient buffer and diagnostics for a batch of already sampled points.
fn gradient_on_points<P: Policy>(
    policy: &P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    objective: Objective,
    points: &[P::Point],
    standardize: bool,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    check_objective(objective)?;
    let batch = pseudo_rewards(points.to_vec(), policy, gp, &features)?;
    let b = points.len() as f64;
    let mut weights = Vec::with_capacity(points.len());
    let mut surrogate_sum = 0.0;
    for i in 0..points.len() {
        let pi = batch.logprobs[i].exp().clamp(PROB_FLOOR, PROB_CEIL);
        weights.push(match objective {
            Objective::Vbos => batch.pseudo[i],
            _ => objective.weight(batch.mu[i], batch.sigma[i], pi),
        });
        surrogate_sum += batch.mu[i] + (-2.0 * pi.ln()).max(0.0).sqrt() * batch.sigma[i];
    }
    let raw = rloo(&weights)?;
    let second_moment = raw.iter().map(|a| a * a).sum::<f64>() / raw.len() as f64;
    let denom = second_moment.sqrt();
    let advantages: Vec<f64> = if standardize {
        if denom < STD_EPS {
            vec![0.0; raw.len()]
        } else {
            raw.iter().map(|a| a / denom).collect()
        }
    } else {
        raw
    };

    let mut acc = policy.grad_buffer();
    for (x, &a) in batch.points.iter().zip(&advantages) {
        if a != 0.0 {
            policy.grad_logprob(x, a / b, &mut acc)?;
        }
    }
    let diag = StepDiagnostics {
        mean_pseudo: batch.pseudo.iter().sum::<f64>() / b,
        mean_surrogate: surrogate_sum / b,
        advantage_std: denom,
        mean_logprob: batch.logprobs.iter().sum::<f64>() / b,
    };
    Ok((acc.as_slice().to_vec(), diag))
}

/// Monte-Carlo gradient estimate `sum_i (a_i / B) * d ln pi(x_i)` for the
/// given objective, without mutating the policy. `standardize` switches
/// between standardized advantages (the update actually applied, a
/// variance-adaptive learning rate) and raw leave-one-out advantages (the
/// unbiased estimator of the objective gradient).
pub fn sample_gradient<P: Policy, R: Rng>(
    policy: &P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    objective: Objective,
    batch_size: usize,
    standardize: bool,
    rng: &mut R,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let points = sample_batch(policy, rng, batch_size);
    gradient_on_points(policy, gp, features, objective, &points, standardize)
}

/// One ascent step computed from an externally generated batch; the batch
/// is evaluated under the policy as it stood before the update.
pub fn gradient_step_on_points<P: Policy>(
    policy: &mut P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    objective: Objective,
    points: &[P::Point],
    lr: f64,
) -> Result<StepDiagnostics> {
    if !(lr > 0.0) {
        return Err(Error::Config(format!("learning rate must be positive, got {lr}")));
    }
    let (grad, diag) = gradient_on_points(&*policy, gp, features, objective, points, true)?;
    let mut acc = policy.grad_buffer();
    for (i, g) in grad.iter().enumerate() {
        acc.add(i, *g);
    }
    apply_step(policy, &mut acc, lr);
    Ok(diag)
}

fn step_with_objective<P: Policy, R: Rng>(
    policy: &mut P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    objective: Objective,
    batch_size: usize,
    lr: f64,
    rng: &mut R,
) -> Result<StepDiagnostics> {
    let points = sample_batch(&*policy, rng, batch_size);
    gradient_step_on_points(policy, gp, features, objective, &points, lr)
}

/// One fine-tuning step toward the variational solution.
pub fn vbos_gradient_step<P: Policy, R: Rng>(
    policy: &mut P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    batch_size: usize,
    lr: f64,
    rng: &mut R,
) -> Result<StepDiagnostics> {
    step_with_objective(policy, gp, features, Objective::Vbos, batch_size, lr, rng)
}

/// One actor-critic step (posterior-mean weights).
pub fn ac_gradient_step<P: Policy, R: Rng>(
    policy: &mut P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    batch_size: usize,
    lr: f64,
    rng: &mut R,
) -> Result<StepDiagnostics> {
    step_with_objective(policy, gp, features, Objective::ActorCritic, batch_size, lr, rng)
}

/// One soft actor-critic step (entropy-regularized weights).
pub fn sac_gradient_step<P: Policy, R: Rng>(
    policy: &mut P,
    gp: &GpState,
    features: impl Fn(&P::Point) -> FeatureVector,
    batch_size: usize,
    lr: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<StepDiagnostics> {
    step_with_objective(
        policy,
        gp,
        features,
        Objective::SoftActorCritic { alpha },
        batch_size,
        lr,
        rng,
    )
}

/// Exact-expectation gradient on an enumerated tabular domain:
/// `sum_x pi_x * w_x * (e_x - pi)`, the enumeration counterpart of the
/// sampled estimator (baseline terms vanish because the score averages to
/// zero under the exact expectation).
pub fn exact_gradient_tabular(
    policy: &crate::policy::TabularPolicy,
    field: &MomentField,
    objective: Objective,
) -> Result<Vec<f64>> {
    let n = policy.len();
    if field.len() != n {
        return Err(Error::Shape { expected: n, got: field.len() });
    }
    let probs = policy.probs();
    let mut grad = vec![0.0; n];
    for x in 0..n {
        let pi = probs[x].clamp(PROB_FLOOR, PROB_CEIL);
        let w = objective.weight(field.mu[x], field.sigma[x], pi);
        let scale = probs[x] * w;
        for (i, g) in grad.iter_mut().enumerate() {
            let indicator = if i == x { 1.0 } else { 0.0 };
            *g += scale * (indicator - probs[i]);
        }
    }
    Ok(grad)
}

/// One exact-expectation ascent step on a tabular policy.
pub fn exact_ascent_step(
    policy: &mut crate::policy::TabularPolicy,
    field: &MomentField,
    objective: Objective,
    lr: f64,
) -> Result<()> {
    let grad = exact_gradient_tabular(policy, field, objective)?;
    let mut acc = policy.grad_buffer();
    for (i, g) in grad.iter().enumerate() {
        acc.add(i, *g);
    }
    apply_step(policy, &mut acc, lr);
    Ok(())
}
