//! Physics-informed multi-output Gaussian process for Euler-Bernoulli beams.
//!
//! Deflection is modelled as a zero-mean GP with a squared-exponential
//! kernel; rotation, strain, moment, shear and load follow by applying the
//! beam's differential operators to that kernel. The bending stiffness EI
//! enters the cross-covariances and is sampled with the kernel and noise
//! hyperparameters by Metropolis-Hastings, giving a probabilistic stiffness
//! and predictive distributions for every field.
//!
//! Module map:
//!
//! - [`kernel`]: squared-exponential derivatives and field cross-covariances
//! - [`dataset`]: observation sets, boundary conditions, CSV formats
//! - [`covariance`]: block covariance assembly and jittered Cholesky
//! - [`posterior`]: priors, likelihood, posterior
//! - [`sampler`]: Metropolis-Hastings and chain diagnostics
//! - [`inference`]: conditional and mixture predictions
//! - [`beam_oracle`]: analytic and finite-element ground truth, synthetic data
//! - [`damage`]: Mahalanobis scoring and parameter studies
//! - [`fit`]: the regression pipeline tying these together

pub mod beam_oracle;
pub mod covariance;
pub mod damage;
pub mod dataset;
pub mod error;
pub mod fit;
pub mod inference;
pub mod kernel;
pub mod posterior;
pub mod sampler;
pub mod seed;

pub use error::{Error, Result};
pub use kernel::{KernelParams, QuantityKind};
