//! The variational optimistic-sampling objective and its near-closed-form
//! maximizer.
//!
//! Over a finite support with posterior moments `(mu_x, sigma_x)`, the
//! objective is
//!
//! ```text
//! V(pi) = sum_x pi_x * (mu_x + sqrt(-2 ln pi_x) * sigma_x)
//! ```
//!
//! an upper-confidence value with an entropy-adaptive bonus. `V` is concave
//! on the simplex (strictly when every `sigma_x > 0`) and its maximizer has
//! the closed form `pi_x = v((mu_x - kappa*) / sigma_x)` where the link
//! `v(c) = exp(-(sqrt(c^2 + 4) - c)^2 / 8)` is a strictly increasing CDF and
//! the threshold `kappa*` normalizes the sum to one. `kappa*` is located by
//! bisection, so solving costs `Θ(|X|)` per probe.
//!
//! The module also provides the suboptimality gap of an arbitrary policy
//! (a Bregman divergence in disguise) and a Monte-Carlo check of the
//! Gaussian expected-maximum bound `E[max_x R_x] <= max_p V(p)`.

use crate::error::{Error, Result};
use crate::linalg::{affine_gaussian, SqMat};
use rand::Rng;
use rand_distr::StandardNormal;

/// Smallest probability fed into logarithms or the inverse link.
pub const PROB_FLOOR: f64 = 1e-300;
/// Largest probability fed into logarithms or the inverse link.
pub const PROB_CEIL: f64 = 1.0 - 1e-12;

/// Posterior moments restricted to an enumerable support.
#[derive(Debug, Clone)]
pub struct MomentField {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl MomentField {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Input("moment field must cover at least one point".into()));
        }
        if mu.len() != sigma.len() {
            return Err(Error::Shape { expected: mu.len(), got: sigma.len() });
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("moment field entries must be finite".into()));
        }
        if sigma.iter().any(|s| *s < 0.0) {
            return Err(Error::Input("standard deviations must be nonnegative".into()));
        }
        Ok(Self { mu, sigma })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// The exact maximizer over a finite support together with the normalizing
/// threshold. `defined_kappa` is false for degenerate supports (a single
/// point, or no stochastic direction at all), in which case `kappa_star` is
/// NaN and only `pi` is meaningful.
#[derive(Debug, Clone)]
pub struct VbosSolution {
    pub pi: Vec<f64>,
    pub kappa_star: f64,
    pub defined_kappa: bool,
}

/// The link function `v(c) = exp(-(sqrt(c^2 + 4) - c)^2 / 8)`.
///
/// Strictly increasing, with limits 0 at -inf and 1 at +inf. For positive
/// `c` the difference is evaluated as `4 / (sqrt(c^2 + 4) + c)` to avoid
/// cancellation.
pub fn v(c: f64) -> f64 {
    let root = (c * c + 4.0).sqrt();
    let diff = if c > 0.0 { 4.0 / (root + c) } else { root - c };
    (-(diff * diff) / 8.0).exp()
}

/// Inverse link `v^-1(u) = 1/sqrt(-2 ln u) - sqrt(-2 ln u)`.
///
/// Inputs are clamped to `[PROB_FLOOR, PROB_CEIL]` before evaluation; values
/// outside `(0, 1)` are rejected.
pub fn v_inv(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("inverse link requires u in (0, 1), got {u}")));
    }
    Ok(v_inv_clamped(u))
}

/// Inverse link applied after clamping; total on all reals.
pub(crate) fn v_inv_clamped(u: f64) -> f64 {
    let u = u.clamp(PROB_FLOOR, PROB_CEIL);
    let t = (-2.0 * u.ln()).sqrt();
    1.0 / t - t
}

fn check_simplex(pi: &[f64], tol: f64) -> Result<()> {
    if pi.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0 + tol) {
        return Err(Error::Input("probability vector has entries outside [0, 1]".into()));
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::Input(format!("probability vector sums to {sum}, not 1")));
    }
    Ok(())
}

/// Per-point contribution `mu + sqrt(-2 ln p) * sigma`, with the convention
/// that a zero-probability point contributes zero.
#[inline]
fn surrogate(p: f64, mu: f64, sigma: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let bonus = (-2.0 * p.min(1.0).ln()).max(0.0).sqrt();
    mu + bonus * sigma
}

/// The objective `V(pi)`.
pub fn vbos_value(pi: &[f64], field: &MomentField) -> Result<f64> {
    if pi.len() != field.len() {
        return Err(Error::Shape { expected: field.len(), got: pi.len() });
    }
    check_simplex(pi, 1e-8)?;
    let mut acc = 0.0;
    for ((&p, &mu), &sigma) in pi.iter().zip(&field.mu).zip(&field.sigma) {
        if p > 0.0 {
            acc += p * surrogate(p, mu, sigma);
        }
    }
    Ok(acc)
}

/// Maximizes `V` over the simplex.
///
/// `kappa*` is found by bisection on the strictly decreasing
/// `g(kappa) = sum_x v((mu_x - kappa)/sigma_x) - 1`, bracketed by
/// `[min mu - 40 max sigma - 1, max mu + 40 max sigma + 1]`, to a residual
/// of 1e-12. Points with `sigma_x = 0` enter as their `sigma -> 0` limit:
/// an indicator of `mu_x > kappa`, realized as weight 1 above the threshold
/// and a machine-epsilon weight below it, with the whole vector renormalized
/// at the end.
pub fn vbos_solve(field: &MomentField) -> Result<VbosSolution> {
    let n = field.len();
    if n == 0 {
        return Err(Error::Input("empty support".into()));
    }
    if n == 1 {
        return Ok(VbosSolution { pi: vec![1.0], kappa_star: f64::NAN, defined_kappa: false });
    }

    let stochastic: Vec<usize> = (0..n).filter(|&i| field.sigma[i] > 0.0).collect();

    if stochastic.is_empty() {
        // Fully deterministic field: all mass on the lowest-index argmax,
        // epsilon elsewhere.
        let mut best = 0usize;
        for i in 1..n {
            if field.mu[i] > field.mu[best] {
                best = i;
            }
        }
        let mut weights = vec![f64::EPSILON; n];
        weights[best] = 1.0;
        return Ok(VbosSolution {
            pi: normalize(weights),
            kappa_star: f64::NAN,
            defined_kappa: false,
        });
    }

    let max_sigma = field.sigma.iter().cloned().fold(0.0f64, f64::max);
    let min_mu = field.mu.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_mu = field.mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = min_mu - 40.0 * max_sigma - 1.0;
    let mut hi = max_mu + 40.0 * max_sigma + 1.0;

    // g(kappa) + 1: total unnormalized mass at threshold kappa, including
    // the sigma = 0 indicator terms.
    let total_mass = |kappa: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let s = field.sigma[i];
            if s > 0.0 {
                acc += v((field.mu[i] - kappa) / s);
            } else if field.mu[i] > kappa {
                acc += 1.0;
            }
        }
        acc
    };

    debug_assert!(total_mass(lo) >= 1.0);
    debug_assert!(total_mass(hi) <= 1.0);
    let mut kappa = 0.5 * (lo + hi);
    for _ in 0..200 {
        kappa = 0.5 * (lo + hi);
        let g = total_mass(kappa) - 1.0;
        if g.abs() < 1e-12 {
            break;
        }
        if g > 0.0 {
            lo = kappa;
        } else {
            hi = kappa;
        }
        if hi - lo < f64::EPSILON * kappa.abs().max(1.0) {
            break;
        }
    }

    let mut weights = vec![0.0; n];
    for i in 0..n {
        let s = field.sigma[i];
        weights[i] = if s > 0.0 {
            v((field.mu[i] - kappa) / s).max(PROB_FLOOR)
        } else if field.mu[i] > kappa {
            1.0
        } else {
            f64::EPSILON
        };
    }
    Ok(VbosSolution { pi: normalize(weights), kappa_star: kappa, defined_kappa: true })
}

fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    weights
}

/// Suboptimality gap `V(pi~) - V(pi)` of `pi` relative to the exact solution.
///
/// Also evaluates the explicit divergence form via [`bregman_explicit`] and
/// checks (in debug builds) that both routes agree; they coincide because
/// the objective's gradient at the maximizer is constant across the simplex.
pub fn bregman_gap(pi: &[f64], solution: &VbosSolution, field: &MomentField) -> Result<f64> {
    let gap = vbos_value(&solution.pi, field)? - vbos_value(pi, field)?;
    debug_assert!({
        let explicit = bregman_explicit(pi, solution, field)?;
        (explicit - gap).abs() <= 1e-6 * (1.0 + gap.abs())
    });
    Ok(gap)
}

/// The divergence in its explicit form
/// `f(pi) - f(pi~) - <grad f(pi~), pi - pi~>` for the convex
/// `f(p) = -sum_x p_x sigma_x sqrt(-2 ln p_x)`, whose gradient is
/// `sigma_x * v^-1(p_x)` per coordinate.
pub fn bregman_explicit(pi: &[f64], solution: &VbosSolution, field: &MomentField) -> Result<f64> {
    if pi.len() != field.len() || solution.pi.len() != field.len() {
        return Err(Error::Shape { expected: field.len(), got: pi.len() });
    }
    check_simplex(pi, 1e-8)?;
    let f = |p: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (&px, &sigma) in p.iter().zip(&field.sigma) {
            if px > 0.0 {
                acc -= px * sigma * (-2.0 * px.min(1.0).ln()).max(0.0).sqrt();
            }
        }
        acc
    };
    let mut inner = 0.0;
    for i in 0..field.len() {
        let grad_i = field.sigma[i] * v_inv_clamped(solution.pi[i]);
        inner += grad_i * (pi[i] - solution.pi[i]);
    }
    Ok(f(pi) - f(&solution.pi) - inner)
}

/// Monte-Carlo check of the expected-maximum bound.
///
/// Draws `n_mc` samples of `R ~ N(mu, cov)`, estimates `E[max_x R_x]` with
/// its standard error, and returns the variational bound computed from the
/// diagonal moments. The caller asserts `mc_mean <= bound + 3 * mc_se`.
pub fn expected_max_bound_check<R: Rng>(
    field: &MomentField,
    cov: &SqMat,
    n_mc: usize,
    rng: &mut R,
) -> Result<(f64, f64, f64)> {
    let n = field.len();
    if cov.n != n {
        return Err(Error::Shape { expected: n, got: cov.n });
    }
    if n_mc < 1000 {
        return Err(Error::Input(format!("need at least 1000 Monte-Carlo draws, got {n_mc}")));
    }
    let factor = cov
        .cholesky_psd(1e-9 * (1.0 + cov.data.iter().fold(0.0f64, |a, b| a.max(b.abs()))))
        .ok_or_else(|| Error::Input("covariance is not positive semi-definite".into()))?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut z = vec![0.0; n];
    for _ in 0..n_mc {
        for zi in &mut z {
            *zi = rng.sample(StandardNormal);
        }
        let draw = affine_gaussian(&field.mu, &factor, &z);
        let m = draw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        sum += m;
        sum_sq += m * m;
    }
    let mean = sum / n_mc as f64;
    let var = (sum_sq / n_mc as f64 - mean * mean).max(0.0);
    let se = (var / n_mc as f64).sqrt();
    let solution = vbos_solve(field)?;
    let bound = vbos_value(&solution.pi, field)?;
    Ok((mean, se, bound))
}
