//! Experiment runner behind the `quincunx` binary.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_config, ExperimentSpec};
pub use experiment::{run_experiment, CurveKind, ResultBundle};
pub use output::emit_csv;
