//! Posterior-quality metrics: point summaries, coverage, in-sample and
//! leave-one-out predictive scores, and method ranking.

mod loo;
mod predictive;
mod rank;
mod record;
mod summary;

pub use loo::{loo, LooOutcome, TransferWeight, LOO_REFRESH, LOW_ESS};
pub use predictive::{clppd, pointwise_log_lik, ClppdMode, PointwiseLogLik};
pub use rank::rank_methods;
pub use record::{
    read_records, write_records, write_records_to, Method, MetricsRecord, ParseMethodError,
};
pub use summary::{
    bias, coverage_hit, mean, mse, parameter_metrics, stdev, ParameterMetrics, COVERAGE_LEVEL,
};
