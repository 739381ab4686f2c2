//! Experiment configuration: a JSON document resolved against defaults.
//!
//! ```json
//! {
//!   "tasks": ["gaussian-fitness", {"id": "small-gaussian-descriptor", "overrides": {"sigma": 0.015}}],
//!   "algos": ["me", "me-sampling"],
//!   "replications": 10,
//!   "master_seed": 0,
//!   "solver": {"eval_budget": 1000000, "metric_period": 500},
//!   "n_reeval": 50
//! }
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use uqd_core::solver::Aggregation;
use uqd_core::{
    Algo, MetricsConfig, SolverConfig, TaskId, TaskOverrides, TaskSpec, VariationParams,
};

use crate::error::BenchError;

pub const DEFAULT_REPLICATIONS: u64 = 10;
pub const DEFAULT_OUTPUT_DIR: &str = "uqd-out";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    tasks: Vec<Value>,
    algos: Vec<String>,
    replications: Option<u64>,
    master_seed: Option<u64>,
    solver: Option<RawSolver>,
    n_reeval: Option<usize>,
    sigma2_ref: Option<f64>,
    output_dir: Option<PathBuf>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    n_samples: Option<usize>,
    batch_size: Option<usize>,
    init_batch: Option<usize>,
    eval_budget: Option<u64>,
    sigma_iso: Option<f64>,
    sigma_line: Option<f64>,
    metric_period: Option<usize>,
    rows: Option<usize>,
    cols: Option<usize>,
    aggregation: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: String,
    #[serde(default)]
    overrides: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct TaskEntry {
    pub spec: TaskSpec,
    pub overrides: TaskOverrides,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub tasks: Vec<TaskEntry>,
    pub algos: Vec<Algo>,
    pub replications: u64,
    pub master_seed: u64,
    /// Shared solver settings; `algo` is set per run.
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every core. Never affects outputs.
    pub workers: Option<usize>,
    /// Per-run progress lines on stderr.
    pub progress: bool,
}

impl ExperimentConfig {
    pub fn parse(document: &str) -> Result<Self, BenchError> {
        let raw: RawConfig = serde_json::from_str(document)?;
        Self::resolve(raw)
    }

    fn resolve(raw: RawConfig) -> Result<Self, BenchError> {
        if raw.tasks.is_empty() {
            return Err(BenchError::Config("`tasks` must list at least one task".into()));
        }
        if raw.algos.is_empty() {
            return Err(BenchError::Config("`algos` must list at least one solver".into()));
        }
        let mut tasks: Vec<TaskEntry> = Vec::new();
        for value in raw.tasks {
            let entry = match value {
                Value::String(id) => RawTask {
                    id,
                    overrides: BTreeMap::new(),
                },
                obj @ Value::Object(_) => serde_json::from_value(obj)
                    .map_err(|e| BenchError::Config(format!("task entry: {e}")))?,
                other => {
                    return Err(BenchError::Config(format!(
                        "task entries are ids or {{\"id\", \"overrides\"}} objects, got {other}"
                    )))
                }
            };
            let id: TaskId = entry.id.parse()?;
            if tasks.iter().any(|t| t.spec.id == id) {
                return Err(BenchError::Config(format!("task `{id}` listed twice")));
            }
            let spec = TaskSpec::new(id, &entry.overrides)?;
            tasks.push(TaskEntry {
                spec,
                overrides: entry.overrides,
            });
        }
        let mut algos = Vec::new();
        for name in &raw.algos {
            let algo: Algo = name.parse()?;
            if algos.contains(&algo) {
                return Err(BenchError::Config(format!("solver `{algo}` listed twice")));
            }
            algos.push(algo);
        }

        let replications = raw.replications.unwrap_or(DEFAULT_REPLICATIONS);
        if replications == 0 {
            return Err(BenchError::Config("replications must be >= 1".into()));
        }

        let s = raw.solver.unwrap_or_default();
        let d = SolverConfig::default();
        let aggregation = match s.aggregation.as_deref() {
            None | Some("mean") => Aggregation::Mean,
            Some("median") => Aggregation::Median,
            Some(other) => {
                return Err(BenchError::Config(format!(
                    "aggregation must be `mean` or `median`, got `{other}`"
                )))
            }
        };
        let solver = SolverConfig {
            algo: d.algo,
            n_samples: s.n_samples.unwrap_or(d.n_samples),
            batch_size: s.batch_size.unwrap_or(d.batch_size),
            init_batch: s.init_batch.unwrap_or(d.init_batch),
            eval_budget: s.eval_budget.unwrap_or(d.eval_budget),
            variation: VariationParams {
                sigma_iso: s.sigma_iso.unwrap_or(d.variation.sigma_iso),
                sigma_line: s.sigma_line.unwrap_or(d.variation.sigma_line),
            },
            metric_period: s.metric_period.unwrap_or(d.metric_period),
            resolution: (
                s.rows.unwrap_or(d.resolution.0),
                s.cols.unwrap_or(d.resolution.1),
            ),
            aggregation,
            metrics: MetricsConfig {
                n_reeval: raw.n_reeval.unwrap_or(d.metrics.n_reeval),
                sigma2_ref: raw.sigma2_ref.unwrap_or(d.metrics.sigma2_ref),
            },
        };
        for &algo in &algos {
            SolverConfig { algo, ..solver.clone() }.validate()?;
        }
        if raw.workers == Some(0) {
            return Err(BenchError::Config("workers must be >= 1".into()));
        }

        Ok(Self {
            tasks,
            algos,
            replications,
            master_seed: raw.master_seed.unwrap_or(0),
            solver,
            output_dir: raw
                .output_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            workers: raw.workers,
            progress: false,
        })
    }

    /// Every setting that can influence an output byte, fully resolved.
    /// Output location and worker count are deliberately absent.
    pub fn canonical(&self) -> Value {
        let s = &self.solver;
        let tasks: Vec<Value> = self
            .tasks
            .iter()
            .map(|t| {
                let params: BTreeMap<&str, f64> = t
                    .spec
                    .id
                    .params()
                    .iter()
                    .map(|p| (p.name, t.spec.param(p.name).expect("resolved parameter")))
                    .collect();
                json!({"id": t.spec.id.as_str(), "params": params})
            })
            .collect();
        json!({
            "tasks": tasks,
            "algos": self.algos.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
            "replications": self.replications,
            "master_seed": self.master_seed,
            "solver": {
                "n_samples": s.n_samples,
                "batch_size": s.batch_size,
                "init_batch": s.init_batch,
                "eval_budget": s.eval_budget,
                "sigma_iso": s.variation.sigma_iso,
                "sigma_line": s.variation.sigma_line,
                "metric_period": s.metric_period,
                "rows": s.resolution.0,
                "cols": s.resolution.1,
                "aggregation": match s.aggregation {
                    Aggregation::Mean => "mean",
                    Aggregation::Median => "median",
                },
            },
            "n_reeval": s.metrics.n_reeval,
            "sigma2_ref": s.metrics.sigma2_ref,
        })
    }

    /// SHA-256 of the canonical configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().to_string().as_bytes()))
    }

    pub fn solver_for(&self, algo: Algo) -> SolverConfig {
        SolverConfig {
            algo,
            ..self.solver.clone()
        }
    }
}
