//! Simulation-study harness: scenario definitions, the six-method panel per
//! replicate, aggregation into per-(k, method) tables and their output files.

mod aggregate;
mod output;
mod replicate;
mod scenario;

pub use aggregate::{aggregate, param_groups, AggregateRow, AggregateTable, Cell, ParamGroup};
pub use output::{write_aggregate_csv, write_samples_csv, write_summary_toml, SummaryMeta};
pub use replicate::{
    run_experiment, run_replicate, run_replicate_all_k, ExperimentOutput, Failure, MethodSamples,
    ReplicateOutput,
};
pub use scenario::{
    cure_pilot_s_hat, make_scenario, Example, ScenarioConfig, ScenarioOverrides, ShiftScheme,
    DEFAULT_N_TARGET, DEFAULT_PARTICLES, DEFAULT_REPLICATES, DEFAULT_ROOT_SEED, FULL_PARTICLES,
    FULL_REPLICATES, PILOT_PARTICLES, PILOT_SEED, PILOT_SIZE,
};
