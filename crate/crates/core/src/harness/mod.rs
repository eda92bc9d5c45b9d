//! Seeded Monte Carlo experiments and CSV output.

mod config;
mod experiment;
mod trial;

pub use config::{
    parse_algorithm, AlgorithmKind, AlgorithmParams, AlgorithmSpec, Axis, ExperimentConfig,
    ExperimentKind, Metric, PhaseReference, DEFAULT_NBI_FD_MHZ,
};
pub use experiment::{
    certify_convexity, run_experiment, run_experiment_with, threads_from_env, ConvexityReport,
    RawRow, Report, Row, AGGREGATE_HEADER, RAW_HEADER,
};
pub use trial::{run_trial, trial_matrices, trial_rng, AlgorithmTrace, Fault, TrialResult};
