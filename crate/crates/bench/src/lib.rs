//! Experiment harness for the uncertain quality-diversity benchmark:
//! JSON configuration, CSV formats, replicated runs and summaries.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod harness;
pub mod summary;

pub use config::ExperimentConfig;
pub use error::BenchError;
pub use harness::{run_experiment, RayonExecutor};
