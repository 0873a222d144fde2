//! Constant-memory Gaussian-process inference with a linear kernel.
//!
//! The reward model is `R ~ GP(nu, lambda^2 k)` with `k(x, z) = phi(x)^T
//! phi(z)` for a fixed feature map `phi: X -> R^d`, observed through i.i.d.
//! Gaussian noise whose standard deviation is `lambda * sigma_nar`
//! (`sigma_nar` is the noise-to-amplitude ratio, a fixed constant).
//!
//! Instead of the s x s observation covariance, [`GpState`] tracks
//!
//! * `psi_inv` — the inverse of `Psi = Phi Phi^T + sigma_nar^2 I_d`,
//! * `phi_y = Phi y`, `phi_one = Phi 1`,
//! * the scalars `y^T y`, `y^T 1`, `1^T 1`,
//!
//! which is enough to condition on a new observation, evaluate posterior
//! moments at any point, and refit the prior offset/amplitude by marginal
//! likelihood maximization — each in `Θ(d^2)` time and memory, independent
//! of the number of observations. `psi_inv` is maintained by a rank-one
//! Sherman–Morrison–Woodbury update.

use crate::error::{Error, Result};
use crate::linalg::{dot, SqMat};

/// Floor applied to the amplitude returned by marginal likelihood
/// maximization, so constant observations never collapse the prior to a
/// point mass.
pub const LAMBDA_MIN: f64 = 1e-6;

/// A feature vector `phi(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }
}

/// Posterior mean and standard deviation at a single point. `sigma`
/// already includes the exploration-bonus scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorMoment {
    pub mu: f64,
    pub sigma: f64,
}

/// Sufficient statistics of the linear-kernel GP posterior.
#[derive(Debug, Clone)]
pub struct GpState {
    psi_inv: SqMat,
    phi_y: Vec<f64>,
    phi_one: Vec<f64>,
    s_yy: f64,
    s_y1: f64,
    s_11: f64,
    nu: f64,
    lambda: f64,
    sigma_nar: f64,
    bonus: f64,
}

impl GpState {
    /// Prior state: `psi_inv = I / sigma_nar^2`, zero projections,
    /// `nu = 0`, `lambda = 1`.
    pub fn new(d: usize, sigma_nar: f64, bonus: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("feature dimension must be at least 1".into()));
        }
        if !(sigma_nar > 0.0) || !sigma_nar.is_finite() {
            return Err(Error::Config(format!(
                "noise-to-amplitude ratio must be positive and finite, got {sigma_nar}"
            )));
        }
        if !(bonus >= 1.0) || !bonus.is_finite() {
            return Err(Error::Config(format!("exploration bonus must be >= 1, got {bonus}")));
        }
        let mut psi_inv = SqMat::identity(d);
        psi_inv.scale(1.0 / (sigma_nar * sigma_nar));
        Ok(Self {
            psi_inv,
            phi_y: vec![0.0; d],
            phi_one: vec![0.0; d],
            s_yy: 0.0,
            s_y1: 0.0,
            s_11: 0.0,
            nu: 0.0,
            lambda: 1.0,
            sigma_nar,
            bonus,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi_y.len()
    }

    /// Number of conditioned observations.
    pub fn count(&self) -> usize {
        self.s_11.round() as usize
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma_nar(&self) -> f64 {
        self.sigma_nar
    }

    pub fn bonus(&self) -> f64 {
        self.bonus
    }

    pub fn psi_inv(&self) -> &SqMat {
        &self.psi_inv
    }

    /// Installs prior parameters, normally the output of [`GpState::mlm`].
    pub fn set_prior(&mut self, nu: f64, lambda: f64) -> Result<()> {
        if !nu.is_finite() || !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Input(format!("invalid prior parameters nu={nu} lambda={lambda}")));
        }
        self.nu = nu;
        self.lambda = lambda;
        Ok(())
    }

    fn check_dim(&self, phi: &FeatureVector) -> Result<()> {
        if phi.dim() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: phi.dim() });
        }
        Ok(())
    }

    /// Conditions on one observation `y` at features `phi`.
    ///
    /// `psi_inv` is updated by the rank-one identity
    /// `(Psi + p p^T)^-1 = Psi^-1 - (Psi^-1 p)(p^T Psi^-1) / (1 + p^T Psi^-1 p)`;
    /// the update is written symmetrically so round-off cannot accumulate
    /// asymmetry.
    pub fn update(&mut self, phi: &FeatureVector, y: f64) -> Result<()> {
        self.check_dim(phi)?;
        if !y.is_finite() {
            return Err(Error::Input(format!("observation must be finite, got {y}")));
        }
        let d = self.dim();
        let p = phi.as_slice();
        let u = self.psi_inv.mat_vec(p);
        let denom = 1.0 + dot(p, &u);
        let scale = 1.0 / denom;
        for i in 0..d {
            let ui = u[i];
            for j in 0..=i {
                let delta = scale * ui * u[j];
                *self.psi_inv.at_mut(i, j) -= delta;
                if i != j {
                    *self.psi_inv.at_mut(j, i) -= delta;
                }
            }
        }
        for i in 0..d {
            self.phi_y[i] += y * p[i];
            self.phi_one[i] += p[i];
        }
        self.s_yy += y * y;
        self.s_y1 += y;
        self.s_11 += 1.0;
        Ok(())
    }

    /// Conditions on a batch, equivalent to sequential single updates for
    /// independent observation noise.
    pub fn update_batch(&mut self, batch: &[(FeatureVector, f64)]) -> Result<()> {
        for (phi, y) in batch {
            self.update(phi, *y)?;
        }
        Ok(())
    }

    /// Posterior moments at `phi`:
    /// `mu = nu + phi^T psi_inv (phi_y - nu * phi_one)` and
    /// `sigma = bonus * lambda * sigma_nar * sqrt(phi^T psi_inv phi)`.
    ///
    /// The bonus scales only the standard deviation; the mean stays an
    /// unbiased predictor.
    pub fn posterior(&self, phi: &FeatureVector) -> Result<PosteriorMoment> {
        self.check_dim(phi)?;
        let p = phi.as_slice();
        let u = self.psi_inv.mat_vec(p);
        let mut centered = self.phi_y.clone();
        for i in 0..centered.len() {
            centered[i] -= self.nu * self.phi_one[i];
        }
        let mu = self.nu + dot(&u, &centered);
        let quad = dot(p, &u).max(0.0);
        let sigma = self.bonus * self.lambda * self.sigma_nar * quad.sqrt();
        Ok(PosteriorMoment { mu, sigma })
    }

    /// Mean and covariance factor of the weight-space posterior, for
    /// Thompson-style function draws.
    ///
    /// The linear model `r(x) = nu + w^T phi(x)` with prior
    /// `w ~ N(0, lambda^2 I)` has posterior
    /// `w | data ~ N(psi_inv (phi_y - nu phi_one), (lambda sigma_nar)^2 psi_inv)`;
    /// scoring candidates with a drawn `w` reproduces function-space
    /// Thompson sampling exactly for linear kernels. The bonus inflates the
    /// covariance factor (never the mean), consistent with
    /// [`GpState::posterior`].
    pub fn weight_posterior(&self) -> (Vec<f64>, SqMat) {
        let d = self.dim();
        let mut centered = self.phi_y.clone();
        for i in 0..d {
            centered[i] -= self.nu * self.phi_one[i];
        }
        let mean = self.psi_inv.mat_vec(&centered);
        let mut factor = self
            .psi_inv
            .cholesky_psd(1e-14)
            .expect("psi_inv is positive definite by construction");
        factor.scale(self.bonus * self.lambda * self.sigma_nar);
        (mean, factor)
    }

    /// Closed-form marginal-likelihood maximizers of the prior offset and
    /// amplitude:
    /// `nu* = (y^T S^-1 1) / (1^T S^-1 1)` and
    /// `lambda* = sqrt((y - nu* 1)^T S^-1 (y - nu* 1) / s)`
    /// for the unscaled observation covariance `S`, evaluated from the
    /// tracked statistics via `S^-1 = (I - Phi^T psi_inv Phi) / sigma_nar^2`.
    ///
    /// The returned amplitude is floored at [`LAMBDA_MIN`]. The caller
    /// installs the values with [`GpState::set_prior`].
    pub fn mlm(&self) -> Result<(f64, f64)> {
        if self.s_11 < 1.0 {
            return Err(Error::State("marginal likelihood maximization requires at least one observation".into()));
        }
        let sn2 = self.sigma_nar * self.sigma_nar;
        let py_u = self.psi_inv.mat_vec(&self.phi_y);
        let p1_u = self.psi_inv.mat_vec(&self.phi_one);
        let y_sinv_1 = (self.s_y1 - dot(&self.phi_y, &p1_u)) / sn2;
        let one_sinv_1 = (self.s_11 - dot(&self.phi_one, &p1_u)) / sn2;
        let y_sinv_y = (self.s_yy - dot(&self.phi_y, &py_u)) / sn2;
        let nu = y_sinv_1 / one_sinv_1;
        let quad = (y_sinv_y - 2.0 * nu * y_sinv_1 + nu * nu * one_sinv_1).max(0.0);
        let lambda = (quad / self.s_11).sqrt().max(LAMBDA_MIN);
        Ok((nu, lambda))
    }

    /// Runs [`GpState::mlm`] and installs the result.
    pub fn refit_mlm(&mut self) -> Result<(f64, f64)> {
        let (nu, lambda) = self.mlm()?;
        self.set_prior(nu, lambda)?;
        Ok((nu, lambda))
    }
}
