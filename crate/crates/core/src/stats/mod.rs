//! Numeric primitives shared by the samplers.

mod hpd;
mod moments;
mod particles;
mod resample;
mod weights;

pub use hpd::{
    gaussian_kde_grid, gaussian_kde_grid_2d, hpd_region, silverman_bandwidth, Interval, KdeGrid,
    KdeGrid2d, HPD_GRID_POINTS,
};
pub use moments::{
    mvn_sample, weighted_mean_cov, CholeskyFactor, Covariance, JITTER_DOUBLINGS, JITTER_SCALE,
};
pub use particles::ParticleSystem;
pub use resample::{categorical_draw, stratified_resample};
pub use weights::{ess, log_sum_exp, LogWeights};
