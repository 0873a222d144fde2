//! Parameterized sampling policies: exact log-probabilities, sampling and
//! plain gradient-ascent updates.
//!
//! Two concrete families are provided. [`TabularPolicy`] is a softmax over
//! an enumerated domain; [`SequencePolicy`] is a small prefix-conditioned
//! autoregressive model over fixed-length token sequences, the desk-scale
//! stand-in for a generative language model. Both expose the same surface:
//! sample, evaluate `ln pi(x)`, accumulate `weight * d ln pi(x) / d theta`,
//! and take one vanilla gradient step (no momentum, no optimizer state).

mod io;
mod sequence;
mod tabular;

pub use io::{load_policy, save_policy, AnyPolicy};
pub use sequence::{all_sequences, SequencePolicy};
pub use tabular::TabularPolicy;

use crate::error::Result;
use crate::point::Point;
use rand::Rng;

/// Policy family tag, also the discriminant in the parameter file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Tabular = 0,
    Sequence = 1,
}

/// Flat per-parameter gradient buffer. Accumulation is linear: adding
/// `a * g` then `b * g` equals adding `(a + b) * g`.
#[derive(Debug, Clone)]
pub struct GradAccumulator {
    grad: Vec<f64>,
}

impl GradAccumulator {
    pub fn zeros(len: usize) -> Self {
        Self { grad: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.grad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grad.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.grad
    }

    #[inline]
    pub(crate) fn add(&mut self, idx: usize, value: f64) {
        self.grad[idx] += value;
    }

    pub fn clear(&mut self) {
        self.grad.fill(0.0);
    }
}

pub trait Policy {
    type Point: Point;

    fn kind(&self) -> PolicyKind;

    fn param_len(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    /// Shape header written to parameter files.
    fn header_dims(&self) -> Vec<u32>;

    /// One i.i.d. draw.
    fn sample<R: Rng>(&self, rng: &mut R) -> Self::Point;

    /// Exact log-probability of `x`; errors on out-of-domain points.
    fn logprob(&self, x: &Self::Point) -> Result<f64>;

    /// Accumulates `weight * d ln pi(x) / d theta` into `acc`.
    fn grad_logprob(&self, x: &Self::Point, weight: f64, acc: &mut GradAccumulator) -> Result<()>;

    /// Exact policy entropy where cheaply available (tabular only).
    fn entropy(&self) -> Option<f64> {
        None
    }

    /// A fresh accumulator sized for this policy.
    fn grad_buffer(&self) -> GradAccumulator {
        GradAccumulator::zeros(self.param_len())
    }
}

/// `count` i.i.d. draws.
pub fn sample_batch<P: Policy, R: Rng>(policy: &P, rng: &mut R, count: usize) -> Vec<P::Point> {
    (0..count).map(|_| policy.sample(rng)).collect()
}

/// Ascent step `theta += lr * grad`; the accumulator is cleared.
pub fn apply_step<P: Policy>(policy: &mut P, acc: &mut GradAccumulator, lr: f64) {
    assert_eq!(acc.len(), policy.param_len(), "gradient buffer does not match policy");
    let params = policy.params_mut();
    for (p, g) in params.iter_mut().zip(acc.as_slice()) {
        *p += lr * g;
    }
    acc.clear();
}
