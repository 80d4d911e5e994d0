//! Transfer sequential Monte Carlo (TSMC) for Bayesian transfer learning with
//! power priors.
//!
//! The crate is organised bottom-up:
//!
//! - [`stats`]: weight algebra, resampling, weighted moments, multivariate
//!   normal draws and HPD regions.
//! - [`model`]: the [`model::Model`] abstraction, the linear-regression and
//!   Weibull cure models, their data generators and CSV codecs.
//! - [`smc`]: adaptive likelihood annealing with the self-tuning random-walk
//!   mutation kernel.
//! - [`tsmc`]: the two-chain transfer sampler, incremental importance
//!   sampling over the transfer parameter, evidence-maximising fixed power
//!   prior and the normalised power prior.
//! - [`eval`]: bias/MSE/coverage, CLPPD, importance-sampled LOO and ranking.
//! - [`experiments`]: the simulation-study harness.

pub mod config;
pub mod error;
pub mod eval;
pub mod experiments;
pub mod model;
pub mod rng;
pub mod smc;
pub mod stats;
pub mod tsmc;

pub use error::{Error, Result};

/// Tool version stamped into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
