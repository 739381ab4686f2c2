//! Uncertain quality-diversity benchmark on the planar redundant arm.
//!
//! The crate is `no_std` (it only needs `alloc`) and holds every piece of
//! the benchmark that is a pure function of its inputs:
//!
//! - [`arm`]: forward kinematics, descriptor normalisation and the two
//!   fitness modes of the redundant arm.
//! - [`noise`]: samplers for the noise families used by the tasks.
//! - [`rng`]: counter-keyed random streams, so results never depend on
//!   scheduling.
//! - [`task`]: the benchmark task catalogue and the stochastic evaluation
//!   entry point.
//! - [`archive`]: the MAP-Elites grid.
//! - [`solver`]: MAP-Elites, MAP-Elites-sampling and
//!   MAP-Elites-sampling-Reproducibility.
//! - [`metrics`]: corrected archives, loss metrics and the
//!   reproducibility score.
//!
//! File formats, configuration and the CLI live in the `uqd-bench` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
macro_rules! assert_close {
    ($a:expr, $b:expr, $tol:expr) => {{
        let (a, b): (f64, f64) = ($a, $b);
        assert!((a - b).abs() <= $tol, "{a} != {b} (tol {})", $tol);
    }};
}

pub mod archive;
pub mod arm;
mod error;
pub mod exec;
pub mod metrics;
pub mod noise;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod task;

pub use archive::{CellIndex, Elite, EliteStats, GridArchive, InsertOutcome};
pub use arm::{ArmConfig, Descriptor, FitnessMode, Genotype};
pub use error::{Error, Result};
pub use exec::{BatchExecutor, Sequential};
pub use metrics::{CorrectedArchive, MetricsConfig, MetricsRecord};
pub use noise::{Center, NoiseDistribution, NoiseLocation};
pub use rng::{RngStream, StreamSeed};
pub use solver::{Algo, Aggregation, RunOutput, RunTrace, SolverConfig, VariationParams};
pub use task::{Evaluation, ExpectedEvaluation, TaskId, TaskOverrides, TaskSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
