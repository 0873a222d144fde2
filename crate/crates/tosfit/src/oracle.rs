//! Brute-force reference implementations used by tests and the
//! verification suite.
//!
//! Nothing here is consumed by a production path, and nothing here calls
//! into the modules it validates: this module carries its own dense
//! Cholesky solver and Gaussian sampler precisely so that an agreement
//! check between an oracle and the incremental implementation exercises
//! two genuinely independent routes. Oracles favor obviousness over speed.

use crate::error::{Error, Result};
use crate::gp::{FeatureVector, PosteriorMoment};
use crate::vbos::MomentField;
use rand::Rng;
use rand_distr::StandardNormal;

/// A Monte-Carlo estimate with its standard error and sample count.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

/// Dense lower-triangular Cholesky; local to the oracle module on purpose.
/// Pivots within `tol` of zero are zeroed (PSD rank deficiency), pivots
/// below `-tol` fail.
fn chol(a: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut diag = a[j][j];
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if diag < -tol {
            return None;
        }
        if diag <= tol {
            continue;
        }
        l[j][j] = diag.sqrt();
        for i in (j + 1)..n {
            let mut v = a[i][j];
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            l[i][j] = v / l[j][j];
        }
    }
    Some(l)
}

/// Solves `A x = b` for symmetric positive-definite `A` via the local
/// Cholesky factor.
fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i][k] * y[k];
        }
        y[i] = v / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = y[i];
        for k in (i + 1)..n {
            v -= l[k][i] * x[k];
        }
        x[i] = v / l[i][i];
    }
    x
}

/// Probability of maximality by Monte Carlo: the frequency with which each
/// coordinate of `R ~ N(mu, cov)` attains the maximum. Ties go to the
/// lowest index (a measure-zero event for nondegenerate covariances).
pub fn mc_pom<R: Rng>(
    mu: &[f64],
    cov: &[Vec<f64>],
    n_mc: usize,
    rng: &mut R,
) -> Result<Vec<McEstimate>> {
    let n = mu.len();
    if cov.len() != n || cov.iter().any(|row| row.len() != n) {
        return Err(Error::Shape { expected: n, got: cov.len() });
    }
    if n_mc < 10_000 {
        return Err(Error::Input(format!("need at least 10^4 draws, got {n_mc}")));
    }
    let scale = cov.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let l = chol(cov, 1e-9 * (1.0 + scale))
        .ok_or_else(|| Error::Input("covariance is not positive semi-definite".into()))?;
    let mut counts = vec![0usize; n];
    let mut z = vec![0.0; n];
    for _ in 0..n_mc {
        for zi in &mut z {
            *zi = rng.sample(StandardNormal);
        }
        let mut best = 0usize;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..n {
            let mut val = mu[i];
            for k in 0..=i {
                val += l[i][k] * z[k];
            }
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        counts[best] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n_mc as f64;
            McEstimate { mean: p, se: (p * (1.0 - p) / n_mc as f64).sqrt(), n: n_mc }
        })
        .collect())
}

/// Posterior moments by direct kernel-matrix algebra: builds the s x s
/// observation covariance `K + sigma_nar^2 I`, solves it densely, and
/// evaluates
/// `mu = nu + k_x^T S^-1 (y - nu 1)` and
/// `sigma^2 = bonus^2 lambda^2 (k_xx - k_x^T S^-1 k_x)`.
#[allow(clippy::too_many_arguments)]
pub fn dense_gp_oracle(
    observations: &[(FeatureVector, f64)],
    nu: f64,
    lambda: f64,
    sigma_nar: f64,
    bonus: f64,
    query: &FeatureVector,
) -> Result<PosteriorMoment> {
    let s = observations.len();
    if s > 500 {
        return Err(Error::Input(format!("dense oracle is capped at 500 observations, got {s}")));
    }
    let q = query.as_slice();
    let k_xx: f64 = q.iter().map(|v| v * v).sum();
    if s == 0 {
        return Ok(PosteriorMoment { mu: nu, sigma: bonus * lambda * k_xx.sqrt() });
    }
    let mut gram = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            let mut k: f64 = observations[i]
                .0
                .as_slice()
                .iter()
                .zip(observations[j].0.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            if i == j {
                k += sigma_nar * sigma_nar;
            }
            gram[i][j] = k;
        }
    }
    let l = chol(&gram, 0.0).ok_or_else(|| Error::Input("singular observation covariance".into()))?;
    let k_x: Vec<f64> = observations
        .iter()
        .map(|(phi, _)| phi.as_slice().iter().zip(q).map(|(a, b)| a * b).sum())
        .collect();
    let centered: Vec<f64> = observations.iter().map(|(_, y)| y - nu).collect();
    let alpha = chol_solve(&l, &centered);
    let beta = chol_solve(&l, &k_x);
    let mu = nu + k_x.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
    let var = (k_xx - k_x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).max(0.0);
    Ok(PosteriorMoment { mu, sigma: bonus * lambda * var.sqrt() })
}

/// Exhaustive grid maximization of the variational objective over the
/// simplex, for supports of at most three points.
pub fn simplex_grid_vbos(field: &MomentField, resolution: f64) -> Result<(Vec<f64>, f64)> {
    let n = field.len();
    if n > 3 {
        return Err(Error::Input(format!("grid search is capped at 3 points, got {n}")));
    }
    if !(resolution > 0.0 && resolution <= 1e-3) {
        return Err(Error::Input(format!("resolution must be in (0, 1e-3], got {resolution}")));
    }
    let value = |pi: &[f64]| crate::vbos::vbos_value(pi, field);
    match n {
        1 => Ok((vec![1.0], value(&[1.0])?)),
        2 => {
            let steps = (1.0 / resolution).round() as usize;
            let mut best = (vec![1.0, 0.0], f64::NEG_INFINITY);
            for i in 0..=steps {
                let p = i as f64 / steps as f64;
                let cand = [p, 1.0 - p];
                let v = value(&cand)?;
                if v > best.1 {
                    best = (cand.to_vec(), v);
                }
            }
            Ok(best)
        }
        _ => {
            let steps = (1.0 / resolution).round() as usize;
            let mut best = (vec![1.0, 0.0, 0.0], f64::NEG_INFINITY);
            for i in 0..=steps {
                let p0 = i as f64 / steps as f64;
                for j in 0..=(steps - i) {
                    let p1 = j as f64 / steps as f64;
                    let cand = [p0, p1, (1.0 - p0 - p1).max(0.0)];
                    let v = value(&cand)?;
                    if v > best.1 {
                        best = (cand.to_vec(), v);
                    }
                }
            }
            Ok(best)
        }
    }
}

/// Central finite differences of `f` at `params`.
pub fn finite_diff_grad(
    f: &mut dyn FnMut(&[f64]) -> f64,
    params: &[f64],
    step: f64,
) -> Vec<f64> {
    assert!(step > 0.0);
    let mut grad = vec![0.0; params.len()];
    let mut work = params.to_vec();
    for i in 0..params.len() {
        work[i] = params[i] + step;
        let plus = f(&work);
        work[i] = params[i] - step;
        let minus = f(&work);
        work[i] = params[i];
        grad[i] = (plus - minus) / (2.0 * step);
    }
    grad
}

/// Exhaustive grid maximization of the exact marginal log-likelihood over
/// the prior offset and amplitude.
///
/// For `Y ~ N(nu 1, lambda^2 S)` with `S = K + sigma_nar^2 I` built densely
/// from the observations,
/// `-2 ln p(y) = 2 s ln lambda + ln |S| + (y - nu 1)^T S^-1 (y - nu 1) / lambda^2 + const`;
/// the `ln |S|` term is constant across the grid. The quadratic form is
/// expanded through three dense solves so each grid cell costs O(1).
pub fn grid_mlm(
    observations: &[(FeatureVector, f64)],
    sigma_nar: f64,
    nu_range: (f64, f64),
    lambda_range: (f64, f64),
    resolution: f64,
) -> Result<(f64, f64)> {
    let s = observations.len();
    if s == 0 || s > 200 {
        return Err(Error::Input(format!("grid oracle handles 1..=200 observations, got {s}")));
    }
    if nu_range.1 <= nu_range.0 || lambda_range.1 <= lambda_range.0 {
        return Err(Error::Input("empty search range".into()));
    }
    let mut gram = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            let mut k: f64 = observations[i]
                .0
                .as_slice()
                .iter()
                .zip(observations[j].0.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            if i == j {
                k += sigma_nar * sigma_nar;
            }
            gram[i][j] = k;
        }
    }
    let l = chol(&gram, 0.0).ok_or_else(|| Error::Input("singular observation covariance".into()))?;
    let y: Vec<f64> = observations.iter().map(|(_, yv)| *yv).collect();
    let ones = vec![1.0; s];
    let sinv_y = chol_solve(&l, &y);
    let sinv_1 = chol_solve(&l, &ones);
    let y_sinv_y: f64 = y.iter().zip(&sinv_y).map(|(a, b)| a * b).sum();
    let y_sinv_1: f64 = y.iter().zip(&sinv_1).map(|(a, b)| a * b).sum();
    let one_sinv_1: f64 = ones.iter().zip(&sinv_1).map(|(a, b)| a * b).sum();

    let neg2_loglik = |nu: f64, lambda: f64| -> f64 {
        let quad = y_sinv_y - 2.0 * nu * y_sinv_1 + nu * nu * one_sinv_1;
        2.0 * s as f64 * lambda.ln() + quad / (lambda * lambda)
    };

    let nu_steps = ((nu_range.1 - nu_range.0) / resolution).ceil() as usize;
    let lambda_steps = ((lambda_range.1 - lambda_range.0) / resolution).ceil() as usize;
    let mut best = (nu_range.0, lambda_range.0, f64::INFINITY);
    for i in 0..=nu_steps {
        let nu = nu_range.0 + i as f64 * resolution;
        for j in 0..=lambda_steps {
            let lambda = lambda_range.0 + j as f64 * resolution;
            if lambda <= 0.0 {
                continue;
            }
            let nll = neg2_loglik(nu, lambda);
            if nll < best.2 {
                best = (nu, lambda, nll);
            }
        }
    }
    Ok((best.0, best.1))
}

/// Exact marginal log-likelihood (up to its additive constant) of the
/// observations under prior parameters `(nu, lambda)`; used to verify
/// first-order optimality of the closed-form maximizers.
pub fn exact_loglik(
    observations: &[(FeatureVector, f64)],
    nu: f64,
    lambda: f64,
    sigma_nar: f64,
) -> Result<f64> {
    let s = observations.len();
    if s == 0 {
        return Err(Error::Input("need at least one observation".into()));
    }
    let mut gram = vec![vec![0.0; s]; s];
    for i in 0..s {
        for j in 0..s {
            let mut k: f64 = observations[i]
                .0
                .as_slice()
                .iter()
                .zip(observations[j].0.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            if i == j {
                k += sigma_nar * sigma_nar;
            }
            gram[i][j] = k;
        }
    }
    let l = chol(&gram, 0.0).ok_or_else(|| Error::Input("singular observation covariance".into()))?;
    let centered: Vec<f64> = observations.iter().map(|(_, y)| y - nu).collect();
    let alpha = chol_solve(&l, &centered);
    let quad: f64 = centered.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let logdet_s: f64 = (0..s).map(|i| 2.0 * l[i][i].ln()).sum();
    // ln p = -1/2 (2 s ln lambda + ln|S| + quad / lambda^2) + const
    Ok(-0.5 * (2.0 * s as f64 * lambda.ln() + logdet_s + quad / (lambda * lambda)))
}
