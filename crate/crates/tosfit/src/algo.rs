//! End-to-end optimization loops over a shared environment interface.
//!
//! All loops share one iteration structure: `t_steps` outer iterations,
//! each observing `obs_batch` points and refitting the GP prior by marginal
//! likelihood maximization. The first `burn_in` iterations sample from the
//! untouched policy (or pick uniformly, for pool-based Thompson sampling)
//! so the likelihood fit stabilizes before any adaptation.
//!
//! * [`run_tosfit`] — fine-tunes the policy toward the variational
//!   optimistic-sampling solution: per iteration, `grad_steps` rounds of
//!   (generate `gen_batch` candidates, one policy-gradient step), then the
//!   first `obs_batch` candidates of the final batch are observed.
//! * [`run_ac`] / [`run_sac`] — identical loop with the actor-critic or
//!   entropy-regularized weights.
//! * [`run_unguided`] — frozen policy, no reward model.
//! * [`run_pgts`] — Thompson sampling restricted to a pre-generated
//!   candidate pool.
//! * [`run_exact_ts`] / [`run_exact_vbos`] — enumeration-based reference
//!   baselines: exact posterior Thompson sampling via weight-space draws,
//!   and direct sampling from the exact variational solution.

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::gp::GpState;
use crate::learner::{gradient_step_on_points, Objective, StepDiagnostics};
use crate::linalg::affine_gaussian;
use crate::point::Point;
use crate::policy::{sample_batch, Policy};
use crate::rng::{SeedPlan, Stream};
use crate::vbos::{vbos_solve, vbos_value, MomentField};
use rand::Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

/// Domains at most this large may track the exact suboptimality gap.
const DIAG_ENUM_CAP: u64 = 1 << 13;

/// Hyperparameters of one optimization run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Total outer iterations, burn-in included.
    pub t_steps: usize,
    /// Burn-in observations without policy adaptation (the burn-in phase
    /// spans `ceil(burn_in / obs_batch)` iterations).
    pub burn_in: usize,
    /// Gradient steps per iteration.
    pub grad_steps: usize,
    /// Generation batch size per gradient step.
    pub gen_batch: usize,
    /// Observations per iteration.
    pub obs_batch: usize,
    /// Learning rate.
    pub lr: f64,
    /// Multiplicative exploration bonus on the fitted prior amplitude.
    pub bonus: f64,
    /// Noise-to-amplitude ratio of the reward model.
    pub sigma_nar: f64,
    /// Entropy coefficient for the soft actor-critic loop.
    pub sac_alpha: Option<f64>,
    /// Candidate pool size for pool-based Thompson sampling.
    pub pool_size: usize,
    /// Master seed shared by an experiment.
    pub master_seed: u64,
    /// Per-run seed.
    pub seed: u64,
    /// Record the exact suboptimality gap each iteration (enumerable
    /// domains only; costs one full posterior sweep per iteration).
    pub track_gap: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_steps: 300,
            burn_in: 16,
            grad_steps: 1,
            gen_batch: 16,
            obs_batch: 1,
            lr: 0.05,
            bonus: 4.0,
            sigma_nar: 0.01,
            sac_alpha: None,
            pool_size: 1000,
            master_seed: 0,
            seed: 0,
            track_gap: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_steps == 0 {
            return Err(Error::Config("need at least one iteration".into()));
        }
        if self.burn_in == 0 {
            return Err(Error::Config("burn-in must be at least 1".into()));
        }
        if self.obs_batch == 0 || self.obs_batch > self.gen_batch {
            return Err(Error::Config(format!(
                "observation batch must satisfy 1 <= b <= B, got b={} B={}",
                self.obs_batch, self.gen_batch
            )));
        }
        if self.grad_steps > 0 && self.gen_batch < 2 {
            return Err(Error::Config("generation batch must be at least 2 for gradient steps".into()));
        }
        if self.grad_steps > 0 && !(self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !(self.bonus >= 1.0) {
            return Err(Error::Config(format!("exploration bonus must be >= 1, got {}", self.bonus)));
        }
        if !(self.sigma_nar > 0.0) {
            return Err(Error::Config(format!(
                "noise-to-amplitude ratio must be positive, got {}",
                self.sigma_nar
            )));
        }
        if let Some(alpha) = self.sac_alpha {
            if !(alpha > 0.0) {
                return Err(Error::Config(format!("entropy coefficient must be positive, got {alpha}")));
            }
        }
        if self.pool_size == 0 {
            return Err(Error::Config("pool size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn plan(&self) -> SeedPlan {
        SeedPlan::new(self.master_seed, self.seed)
    }

    /// Iterations covered by the burn-in observation budget.
    pub fn burn_in_iters(&self) -> usize {
        self.burn_in.div_ceil(self.obs_batch)
    }
}

/// One observation row.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsRecord {
    /// Outer iteration (1-based).
    pub step: u32,
    pub point_hash: u64,
    pub reward: f64,
    pub best_seen: f64,
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone)]
pub struct StepDiag {
    pub step: u32,
    /// Exact policy entropy (tabular policies only).
    pub entropy: Option<f64>,
    /// Batch estimate of the variational objective at the current policy.
    pub value_estimate: Option<f64>,
    /// Exact suboptimality gap to the variational solution (enumerable
    /// domains, when enabled).
    pub gap: Option<f64>,
    pub wall_secs: f64,
}

/// Wall time is measurement noise, not run content; equality covers the
/// reproducible fields only.
impl PartialEq for StepDiag {
    fn eq(&self, other: &Self) -> bool {
        self.step == other.step
            && self.entropy == other.entropy
            && self.value_estimate == other.value_estimate
            && self.gap == other.gap
    }
}

/// Complete record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub observations: Vec<ObsRecord>,
    pub steps: Vec<StepDiag>,
}

impl Trace {
    fn push_observation(&mut self, step: u32, hash: u64, reward: f64) {
        let best = match self.observations.last() {
            Some(last) => last.best_seen.max(reward),
            None => reward,
        };
        self.observations.push(ObsRecord { step, point_hash: hash, reward, best_seen: best });
    }

    pub fn final_best(&self) -> f64 {
        self.observations.last().map_or(f64::NEG_INFINITY, |o| o.best_seen)
    }

    /// First iteration whose best-seen reaches `threshold`, if any.
    pub fn first_step_reaching(&self, threshold: f64) -> Option<u32> {
        self.observations.iter().find(|o| o.best_seen >= threshold).map(|o| o.step)
    }

    /// First observation count (1-based) whose best-seen reaches
    /// `threshold`, if any.
    pub fn first_observation_reaching(&self, threshold: f64) -> Option<usize> {
        self.observations.iter().position(|o| o.best_seen >= threshold).map(|i| i + 1)
    }

    /// Mean per-observation regret against `max_reward` over the 1-based
    /// observation range `[from, to]`, clamped to the recorded range.
    pub fn mean_regret(&self, max_reward: f64, from: usize, to: usize) -> f64 {
        let lo = from.max(1) - 1;
        let hi = to.min(self.observations.len());
        if lo >= hi {
            return f64::NAN;
        }
        let slice = &self.observations[lo..hi];
        slice.iter().map(|o| max_reward - o.reward).sum::<f64>() / slice.len() as f64
    }
}

struct GapTracker<P: Point> {
    features: Vec<(P, crate::gp::FeatureVector)>,
}

impl<P: Point> GapTracker<P> {
    fn measure<Pol>(&self, policy: &Pol, gp: &GpState) -> Option<f64>
    where
        Pol: Policy<Point = P>,
    {
        let mut mu = Vec::with_capacity(self.features.len());
        let mut sigma = Vec::with_capacity(self.features.len());
        let mut pi = Vec::with_capacity(self.features.len());
        for (x, phi) in &self.features {
            let m = gp.posterior(phi).ok()?;
            mu.push(m.mu);
            sigma.push(m.sigma);
            pi.push(policy.logprob(x).ok()?.exp());
        }
        let field = MomentField::new(mu, sigma).ok()?;
        let sol = vbos_solve(&field).ok()?;
        let best = vbos_value(&sol.pi, &field).ok()?;
        let mine = vbos_value(&pi, &field).ok()?;
        Some(best - mine)
    }
}

fn adaptive_loop<E, P>(
    env: &E,
    policy: &mut P,
    cfg: &RunConfig,
    objective: Objective,
) -> Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point>,
{
    cfg.validate()?;
    let plan = cfg.plan();
    let mut pol_rng = plan.rng(Stream::PolicySample);
    let mut env_rng = plan.rng(Stream::EnvNoise);
    let mut gp = GpState::new(env.dim(), cfg.sigma_nar, cfg.bonus)?;
    let mut trace = Trace::default();

    let gap_tracker = if cfg.track_gap && env.domain_size() <= DIAG_ENUM_CAP {
        let features =
            env.enumerate()?.into_iter().map(|(x, phi, _)| (x, phi)).collect::<Vec<_>>();
        Some(GapTracker { features })
    } else {
        None
    };

    for step in 1..=cfg.t_steps {
        let t0 = Instant::now();
        let mut value_estimate = None;

        let chosen: Vec<E::Point> = if step <= cfg.burn_in_iters() || cfg.grad_steps == 0 {
            sample_batch(policy, &mut pol_rng, cfg.obs_batch)
        } else {
            let mut last_batch: Vec<E::Point> = Vec::new();
            let mut last_diag: Option<StepDiagnostics> = None;
            for _ in 0..cfg.grad_steps {
                let batch = sample_batch(policy, &mut pol_rng, cfg.gen_batch);
                let diag = gradient_step_on_points(
                    policy,
                    &gp,
                    |x| env.features(x),
                    objective,
                    &batch,
                    cfg.lr,
                )?;
                last_diag = Some(diag);
                last_batch = batch;
            }
            value_estimate = last_diag.map(|d| d.mean_surrogate);
            last_batch.truncate(cfg.obs_batch);
            last_batch
        };

        for x in &chosen {
            let y = env.observe(x, &mut env_rng)?;
            gp.update(&env.features(x), y)?;
            trace.push_observation(step as u32, x.hash64(), y);
        }
        gp.refit_mlm()?;

        let gap = gap_tracker.as_ref().and_then(|g| g.measure(policy, &gp));
        trace.steps.push(StepDiag {
            step: step as u32,
            entropy: policy.entropy(),
            value_estimate,
            gap,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

/// Thompson sampling via fine-tuning: adapts the policy toward the
/// variational solution while optimizing.
pub fn run_tosfit<E, P>(env: &E, policy: &mut P, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point>,
{
    adaptive_loop(env, policy, cfg, Objective::Vbos)
}

/// Actor-critic loop: same structure, posterior-mean weights.
pub fn run_ac<E, P>(env: &E, policy: &mut P, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point>,
{
    adaptive_loop(env, policy, cfg, Objective::ActorCritic)
}

/// Soft actor-critic loop: entropy-regularized weights.
pub fn run_sac<E, P>(env: &E, policy: &mut P, cfg: &RunConfig, alpha: f64) -> Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point>,
{
    adaptive_loop(env, policy, cfg, Objective::SoftActorCritic { alpha })
}

/// Frozen-policy sampling with no reward model.
pub fn run_unguided<E, P>(env: &E, policy: &P, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point>,
{
    cfg.validate()?;
    let plan = cfg.plan();
    let mut pol_rng = plan.rng(Stream::PolicySample);
    let mut env_rng = plan.rng(Stream::EnvNoise);
    let mut trace = Trace::default();
    for step in 1..=cfg.t_steps {
        let t0 = Instant::now();
        for x in sample_batch(policy, &mut pol_rng, cfg.obs_batch) {
            let y = env.observe(&x, &mut env_rng)?;
            trace.push_observation(step as u32, x.hash64(), y);
        }
        trace.steps.push(StepDiag {
            step: step as u32,
            entropy: policy.entropy(),
            value_estimate: None,
            gap: None,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

/// Thompson sampling over a pool generated up-front by the frozen policy.
pub fn run_pgts<E, P>(env: &E, policy: &P, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
    P: Policy<Point = E::Point>,
{
    cfg.validate()?;
    let mut pol_rng = cfg.plan().rng(Stream::PolicySample);
    let pool = sample_batch(policy, &mut pol_rng, cfg.pool_size);
    run_pgts_with_pool(env, pool, cfg)
}

/// Pool-based Thompson sampling over an explicit candidate pool.
///
/// During burn-in, candidates are picked uniformly from the pool; after,
/// each observation scores the pool with one weight-space posterior draw
/// and queries the argmax.
pub fn run_pgts_with_pool<E>(env: &E, pool: Vec<E::Point>, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
{
    cfg.validate()?;
    if pool.is_empty() {
        return Err(Error::Config("candidate pool is empty".into()));
    }
    let plan = cfg.plan();
    let mut env_rng = plan.rng(Stream::EnvNoise);
    let mut draw_rng = plan.rng(Stream::GpDraw);
    let features: Vec<crate::gp::FeatureVector> = pool.iter().map(|x| env.features(x)).collect();
    let mut gp = GpState::new(env.dim(), cfg.sigma_nar, cfg.bonus)?;
    let mut trace = Trace::default();

    for step in 1..=cfg.t_steps {
        let t0 = Instant::now();
        for _ in 0..cfg.obs_batch {
            let idx = if step <= cfg.burn_in_iters() {
                draw_rng.random_range(0..pool.len())
            } else {
                let scores = posterior_draw_scores(&gp, &features, &mut draw_rng);
                argmax(&scores)
            };
            let y = env.observe(&pool[idx], &mut env_rng)?;
            gp.update(&features[idx], y)?;
            trace.push_observation(step as u32, pool[idx].hash64(), y);
        }
        gp.refit_mlm()?;
        trace.steps.push(StepDiag {
            step: step as u32,
            entropy: None,
            value_estimate: None,
            gap: None,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

/// Scores all candidates under one weight-space posterior function draw.
fn posterior_draw_scores<R: Rng>(
    gp: &GpState,
    features: &[crate::gp::FeatureVector],
    rng: &mut R,
) -> Vec<f64> {
    let (mean, factor) = gp.weight_posterior();
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.sample(StandardNormal)).collect();
    let w = affine_gaussian(&mean, &factor, &z);
    features
        .iter()
        .map(|phi| gp.nu() + crate::linalg::dot(&w, phi.as_slice()))
        .collect()
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0usize;
    for i in 1..scores.len() {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

/// Exact Thompson sampling over an enumerated domain: every observation
/// draws one posterior realization (in weight space) and plays its argmax.
///
/// Exact baselines have no policy to stabilize, so they select from the
/// model starting at step 1; the likelihood refit is deferred until
/// `burn_in` observations have accumulated, keeping the unit-amplitude
/// prior until the fit is well-posed.
pub fn run_exact_ts<E>(env: &E, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
{
    cfg.validate()?;
    let listed = env.enumerate()?;
    let plan = cfg.plan();
    let mut env_rng = plan.rng(Stream::EnvNoise);
    let mut draw_rng = plan.rng(Stream::GpDraw);
    let features: Vec<crate::gp::FeatureVector> =
        listed.iter().map(|(_, phi, _)| phi.clone()).collect();
    let mut gp = GpState::new(env.dim(), cfg.sigma_nar, cfg.bonus)?;
    let mut trace = Trace::default();

    for step in 1..=cfg.t_steps {
        let t0 = Instant::now();
        for _ in 0..cfg.obs_batch {
            let scores = posterior_draw_scores(&gp, &features, &mut draw_rng);
            let idx = argmax(&scores);
            let y = env.observe(&listed[idx].0, &mut env_rng)?;
            gp.update(&features[idx], y)?;
            trace.push_observation(step as u32, listed[idx].0.hash64(), y);
        }
        if gp.count() >= cfg.burn_in {
            gp.refit_mlm()?;
        }
        trace.steps.push(StepDiag {
            step: step as u32,
            entropy: None,
            value_estimate: None,
            gap: None,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

/// Exact variational optimistic sampling over an enumerated domain: every
/// iteration solves for the exact distribution over posterior moments and
/// samples observations from it.
pub fn run_exact_vbos<E>(env: &E, cfg: &RunConfig) -> Result<Trace>
where
    E: Environment,
{
    cfg.validate()?;
    let listed = env.enumerate()?;
    let plan = cfg.plan();
    let mut env_rng = plan.rng(Stream::EnvNoise);
    let mut draw_rng = plan.rng(Stream::GpDraw);
    let mut gp = GpState::new(env.dim(), cfg.sigma_nar, cfg.bonus)?;
    let mut trace = Trace::default();

    for step in 1..=cfg.t_steps {
        let t0 = Instant::now();
        let mut mu = Vec::with_capacity(listed.len());
        let mut sigma = Vec::with_capacity(listed.len());
        for (_, phi, _) in &listed {
            let m = gp.posterior(phi)?;
            mu.push(m.mu);
            sigma.push(m.sigma);
        }
        let field = MomentField::new(mu, sigma)?;
        let sol = vbos_solve(&field)?;
        for _ in 0..cfg.obs_batch {
            let idx = sample_categorical(&sol.pi, &mut draw_rng);
            let y = env.observe(&listed[idx].0, &mut env_rng)?;
            gp.update(&listed[idx].1, y)?;
            trace.push_observation(step as u32, listed[idx].0.hash64(), y);
        }
        if gp.count() >= cfg.burn_in {
            gp.refit_mlm()?;
        }
        trace.steps.push(StepDiag {
            step: step as u32,
            entropy: None,
            value_estimate: None,
            gap: None,
            wall_secs: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(trace)
}

fn sample_categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::FiniteGaussianBandit;
    use crate::policy::TabularPolicy;

    fn small_cfg() -> RunConfig {
        RunConfig {
            t_steps: 20,
            burn_in: 4,
            gen_batch: 8,
            lr: 0.1,
            bonus: 2.0,
            seed: 1,
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg();
        cfg.obs_batch = 9;
        assert!(cfg.validate().is_err());
        cfg.obs_batch = 1;
        cfg.burn_in = 0;
        assert!(cfg.validate().is_err());
        cfg.burn_in = 4;
        cfg.sigma_nar = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn all_burn_in_leaves_policy_untouched() {
        let env = FiniteGaussianBandit::new(8, 3, 0.0, 0.0, 1).unwrap();
        let mut cfg = small_cfg();
        cfg.t_steps = 4;
        cfg.burn_in = 4;
        let mut policy = TabularPolicy::new(8);
        let before = policy.params().to_vec();
        run_tosfit(&env, &mut policy, &cfg).unwrap();
        assert_eq!(policy.params(), &before[..]);
    }

    #[test]
    fn zero_grad_steps_match_unguided_choices() {
        let env = FiniteGaussianBandit::new(8, 3, 0.0, 0.0, 1).unwrap();
        let mut cfg = small_cfg();
        cfg.grad_steps = 0;
        let mut policy = TabularPolicy::new(8);
        let adaptive = run_tosfit(&env, &mut policy, &cfg).unwrap();
        let frozen = run_unguided(&env, &TabularPolicy::new(8), &cfg).unwrap();
        let a: Vec<u64> = adaptive.observations.iter().map(|o| o.point_hash).collect();
        let b: Vec<u64> = frozen.observations.iter().map(|o| o.point_hash).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn traces_are_reproducible() {
        let env = FiniteGaussianBandit::new(8, 3, 0.0, 0.3, 1).unwrap();
        let cfg = small_cfg();
        let mut p1 = TabularPolicy::new(8);
        let mut p2 = TabularPolicy::new(8);
        let t1 = run_tosfit(&env, &mut p1, &cfg).unwrap();
        let t2 = run_tosfit(&env, &mut p2, &cfg).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(p1.params(), p2.params());
    }

    #[test]
    fn best_seen_is_monotone_everywhere() {
        let env = FiniteGaussianBandit::new(8, 3, 0.0, 0.5, 2).unwrap();
        let cfg = small_cfg();
        let mut policy = TabularPolicy::new(8);
        for trace in [
            run_tosfit(&env, &mut policy.clone(), &cfg).unwrap(),
            run_unguided(&env, &policy, &cfg).unwrap(),
            run_pgts(&env, &policy, &cfg).unwrap(),
            run_exact_ts(&env, &cfg).unwrap(),
            run_exact_vbos(&env, &cfg).unwrap(),
            run_ac(&env, &mut policy.clone(), &cfg).unwrap(),
            run_sac(&env, &mut policy, &cfg, 0.5).unwrap(),
        ] {
            let mut last = f64::NEG_INFINITY;
            for o in &trace.observations {
                assert!(o.best_seen >= last);
                assert!(o.best_seen >= o.reward);
                last = o.best_seen;
            }
            assert_eq!(trace.observations.len(), cfg.t_steps * cfg.obs_batch);
            assert_eq!(trace.steps.len(), cfg.t_steps);
        }
    }

    #[test]
    fn batched_run_matches_observation_budget() {
        let env = FiniteGaussianBandit::new(8, 3, 0.0, 0.0, 3).unwrap();
        let mut sequential = small_cfg();
        sequential.t_steps = 32;
        sequential.obs_batch = 1;
        let mut batched = small_cfg();
        batched.gen_batch = 8;
        batched.obs_batch = 8;
        batched.t_steps = 4;
        let a = run_tosfit(&env, &mut TabularPolicy::new(8), &sequential).unwrap();
        let b = run_tosfit(&env, &mut TabularPolicy::new(8), &batched).unwrap();
        assert_eq!(a.observations.len(), b.observations.len());
        assert_eq!(b.steps.len(), sequential.t_steps / batched.obs_batch);
    }

    #[test]
    fn pool_of_one_is_constant() {
        let env = FiniteGaussianBandit::new(8, 3, 0.0, 0.0, 1).unwrap();
        let cfg = small_cfg();
        let trace = run_pgts_with_pool(&env, vec![5usize], &cfg).unwrap();
        assert!(trace.observations.iter().all(|o| o.point_hash == 5usize.hash64()));
        let r = env.reward(&5).unwrap();
        assert!(trace.observations.iter().all(|o| (o.best_seen - r).abs() < 1e-12));
    }

    #[test]
    fn pool_restriction_caps_best_seen() {
        let env = FiniteGaussianBandit::new(16, 4, 0.0, 0.0, 9) .unwrap();
        let rewards = env.rewards().to_vec();
        let mut order: Vec<usize> = (0..16).collect();
        order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]));
        let best_arm = order[0];

        // Pool containing the best arm eventually finds it.
        let mut cfg = small_cfg();
        cfg.t_steps = 200;
        let with_best: Vec<usize> = order[..8].to_vec();
        let trace = run_pgts_with_pool(&env, with_best, &cfg).unwrap();
        assert!((trace.final_best() - rewards[best_arm]).abs() < 1e-12);

        // Pool without the best arm can never reach it.
        let without_best: Vec<usize> = order[1..9].to_vec();
        let pool_max = rewards[order[1]];
        let trace = run_pgts_with_pool(&env, without_best, &cfg).unwrap();
        assert!(trace.final_best() <= pool_max + 1e-12);
        assert!(trace.final_best() < rewards[best_arm]);
    }

    #[test]
    fn deterministic_policy_makes_constant_unguided_trace() {
        let env = FiniteGaussianBandit::new(4, 3, 0.0, 0.0, 1).unwrap();
        let policy = TabularPolicy::from_logits(vec![50.0, 0.0, 0.0, 0.0]);
        let cfg = small_cfg();
        let trace = run_unguided(&env, &policy, &cfg).unwrap();
        let first = trace.observations[0].best_seen;
        assert!(trace.observations.iter().all(|o| o.best_seen == first));
    }

    #[test]
    fn uniform_hitting_time_is_near_domain_size() {
        // Expected hitting time of the unique best arm under uniform
        // sampling is |X|; accept [0.5, 2] x |X| for the mean over seeds.
        let env = FiniteGaussianBandit::default_64(21);
        let best = env.true_max();
        let mut cfg = small_cfg();
        cfg.t_steps = 640;
        let mut total = 0.0;
        let seeds = 25;
        for seed in 0..seeds {
            cfg.seed = seed;
            let trace = run_unguided(&env, &TabularPolicy::new(64), &cfg).unwrap();
            let hit = trace
                .first_observation_reaching(best - 1e-12)
                .unwrap_or(cfg.t_steps * cfg.obs_batch);
            total += hit as f64;
        }
        let mean = total / seeds as f64;
        assert!(
            (32.0..=128.0).contains(&mean),
            "mean hitting time {mean} outside [0.5, 2] x 64"
        );
    }

    #[test]
    fn exact_ts_first_step_is_symmetric() {
        // Two arms with mirrored features: the prior draw picks each side
        // half the time.
        let env = FiniteGaussianBandit::new(2, 2, 0.0, 0.0, 40).unwrap();
        let mut cfg = small_cfg();
        cfg.t_steps = 1;
        cfg.bonus = 1.0;
        let mut first = [0usize; 2];
        for seed in 0..4000 {
            cfg.seed = seed;
            let trace = run_exact_ts(&env, &cfg).unwrap();
            let hash0 = 0usize.hash64();
            first[usize::from(trace.observations[0].point_hash != hash0)] += 1;
        }
        let freq = first[0] as f64 / 4000.0;
        // The two arms are not exactly symmetric (random features), but a
        // prior draw has no reward information: both sides must come up
        // with nontrivial frequency.
        assert!(freq > 0.1 && freq < 0.9, "first-step frequency {freq}");
    }

    #[test]
    fn exact_vbos_first_step_matches_solution() {
        let env = FiniteGaussianBandit::new(4, 3, 0.0, 0.0, 11).unwrap();
        let listed = env.enumerate().unwrap();
        let gp = GpState::new(3, 0.01, 1.0).unwrap();
        let field = MomentField::new(
            listed.iter().map(|e| gp.posterior(&e.1).unwrap().mu).collect(),
            listed.iter().map(|e| gp.posterior(&e.1).unwrap().sigma).collect(),
        )
        .unwrap();
        let sol = vbos_solve(&field).unwrap();

        let mut cfg = small_cfg();
        cfg.t_steps = 1;
        cfg.bonus = 1.0;
        let n = 40_000;
        let mut counts = [0usize; 4];
        for seed in 0..n {
            cfg.seed = seed as u64;
            let trace = run_exact_vbos(&env, &cfg).unwrap();
            for arm in 0..4usize {
                if trace.observations[0].point_hash == arm.hash64() {
                    counts[arm] += 1;
                }
            }
        }
        for arm in 0..4 {
            let freq = counts[arm] as f64 / n as f64;
            let se = (sol.pi[arm] * (1.0 - sol.pi[arm]) / n as f64).sqrt();
            assert!(
                (freq - sol.pi[arm]).abs() <= 4.0 * se + 1e-9,
                "arm {arm}: freq {freq} vs pi {}",
                sol.pi[arm]
            );
        }
    }

    #[test]
    fn sac_keeps_entropy_higher_than_ac() {
        let env = FiniteGaussianBandit::new(4, 3, 0.0, 0.0, 17).unwrap();
        let mut cfg = small_cfg();
        cfg.t_steps = 100;
        cfg.lr = 0.3;
        let seeds = 25;
        let mut ac_total = 0.0;
        let mut sac_total = 0.0;
        for seed in 0..seeds {
            cfg.seed = seed;
            let mut ac_policy = TabularPolicy::new(4);
            let ac_trace = run_ac(&env, &mut ac_policy, &cfg).unwrap();
            let mut sac_policy = TabularPolicy::new(4);
            let sac_trace = run_sac(&env, &mut sac_policy, &cfg, 10.0).unwrap();
            ac_total += ac_trace.steps.last().unwrap().entropy.unwrap();
            sac_total += sac_trace.steps.last().unwrap().entropy.unwrap();
        }
        assert!(
            sac_total > ac_total,
            "entropy at step 100: sac {sac_total} vs ac {ac_total}"
        );
    }
}
