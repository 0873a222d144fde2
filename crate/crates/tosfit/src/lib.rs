//! Bayesian optimization over large discrete domains by Thompson sampling
//! with a trainable generative proposal policy.
//!
//! Instead of maximizing an acquisition function, candidate generation *is*
//! the acquisition step: a policy parameterizes the probability that each
//! point attains the maximum reward, and is fine-tuned online toward the
//! exact variational solution over a constant-time linear-kernel Gaussian
//! process. The crate provides
//!
//! * [`gp`] — `Θ(d^2)` GP inference: rank-one conditioning, posterior
//!   moments, closed-form marginal-likelihood maximization;
//! * [`vbos`] — the variational objective, its near-closed-form maximizer,
//!   the link function pair and the expected-maximum bound;
//! * [`policy`] — tabular softmax and autoregressive sequence policies;
//! * [`learner`] — score-trick gradients with leave-one-out baselines and
//!   standardized (group-relative) advantages;
//! * [`algo`] — the fine-tuning loop and its baselines (unguided
//!   generation, pool-based Thompson sampling, actor-critic variants,
//!   enumeration-exact references);
//! * [`mod@env`] — synthetic benchmark environments and pre-training
//!   priors;
//! * [`oracle`] — independent brute-force references used only by tests
//!   and the verification suite;
//! * [`checks`] — the runnable verification criteria.
//!
//! The `tosfit` binary in the companion crate drives experiments from
//! config files and emits CSV traces.

pub mod algo;
pub mod checks;
pub mod env;
pub mod error;
pub mod gp;
pub mod learner;
pub mod linalg;
pub mod oracle;
pub mod point;
pub mod policy;
pub mod rng;
pub mod vbos;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book;
