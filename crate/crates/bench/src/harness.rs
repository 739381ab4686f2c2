//! Replicated experiments over the task × solver matrix.
//!
//! Output layout under the configured directory:
//!
//! ```text
//! <task>/<algo>/rep<k>/archive_illusory.csv
//! <task>/<algo>/rep<k>/archive_corrected.csv
//! <task>/<algo>/rep<k>/archive_repro.csv
//! metrics.csv  summary.csv  manifest.json
//! ```
//!
//! Every byte of every CSV is a function of the canonical configuration:
//! runs are keyed by `(task, algo, replication)` and results are gathered
//! in job order, whatever the worker count.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use uqd_core::metrics::{reproducibility_archive, snapshot};
use uqd_core::solver::run_with;
use uqd_core::{
    Algo, BatchExecutor, MetricsConfig, MetricsRecord, StreamSeed, TaskId, TaskSpec,
};

use crate::config::{ExperimentConfig, TaskEntry};
use crate::csv_io::{
    metrics_line, read_archive, read_metrics, write_archive, write_reproducibility, MetricsRow,
    METRICS_HEADER,
};
use crate::error::BenchError;
use crate::summary::{summarize, write_summary};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Evaluates batches on the current rayon pool, results in index order.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonExecutor;

impl BatchExecutor for RayonExecutor {
    fn map_indexed<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).into_par_iter().map(f).collect()
    }
}

/// Root stream of one replication.
pub fn run_seed(master_seed: u64, task: TaskId, algo: Algo, replication: u64) -> StreamSeed {
    StreamSeed::root(master_seed).derive(&[task.code(), algo.code(), replication])
}

pub fn run_dir(task: TaskId, algo: Algo, replication: u64) -> PathBuf {
    PathBuf::from(task.as_str())
        .join(algo.as_str())
        .join(format!("rep{replication}"))
}

/// Writes through a temporary file in the same directory, then renames.
/// Returns the SHA-256 of the content.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<String, BenchError> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).map_err(|e| BenchError::io(parent, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| BenchError::io(parent, e))?;
    tmp.write_all(bytes).map_err(|e| BenchError::io(path, e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(sha256_hex(bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn rel_string(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub task: TaskId,
    pub algo: Algo,
    pub replication: u64,
    pub seed: StreamSeed,
    pub outcome: Result<CompletedRun, String>,
}

#[derive(Debug, Clone)]
pub struct CompletedRun {
    pub trace: Vec<MetricsRecord>,
    pub evaluations_used: u64,
    pub candidates_evaluated: u64,
    /// `(path relative to the output directory, sha256)`.
    pub files: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub runs: Vec<RunReport>,
    pub metrics: Vec<MetricsRow>,
    pub files: Vec<(String, String)>,
}

fn run_one(
    cfg: &ExperimentConfig,
    entry: &TaskEntry,
    algo: Algo,
    replication: u64,
    seed: StreamSeed,
) -> Result<CompletedRun, BenchError> {
    let solver = cfg.solver_for(algo);
    let out = run_with(&entry.spec, &solver, seed, &RayonExecutor)?;
    let n_joints = entry.spec.arm.n_joints();
    let rel = run_dir(entry.spec.id, algo, replication);
    let repro = reproducibility_archive(&out.corrected, solver.metrics.sigma2_ref)?;
    let mut files = Vec::new();
    for (name, content) in [
        ("archive_illusory.csv", write_archive(&out.archive, n_joints)),
        ("archive_corrected.csv", write_archive(&out.corrected.archive, n_joints)),
        ("archive_repro.csv", write_reproducibility(&repro)),
    ] {
        let path = rel.join(name);
        let sha = write_atomic(&cfg.output_dir.join(&path), content.as_bytes())?;
        files.push((rel_string(&path), sha));
    }
    Ok(CompletedRun {
        trace: out.trace.records,
        evaluations_used: out.evaluations_used,
        candidates_evaluated: out.candidates_evaluated,
        files,
    })
}

/// Runs every `(task, algo, replication)` and writes all artefacts.
///
/// Failed runs are recorded as incomplete in the manifest, which is always
/// written; the call then returns [`BenchError::Incomplete`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| BenchError::io(&cfg.output_dir, e))?;
    let jobs: Vec<(&TaskEntry, Algo, u64)> = cfg
        .tasks
        .iter()
        .flat_map(|t| {
            cfg.algos
                .iter()
                .flat_map(move |&a| (0..cfg.replications).map(move |r| (t, a, r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))?;
    let total = jobs.len();
    let runs: Vec<RunReport> = pool.install(|| {
        jobs.par_iter()
            .map(|&(entry, algo, replication)| {
                let id = entry.spec.id;
                let seed = run_seed(cfg.master_seed, id, algo, replication);
                let started = Instant::now();
                let outcome = run_one(cfg, entry, algo, replication, seed).map_err(|e| e.to_string());
                match &outcome {
                    _ if !cfg.progress => {}
                    Ok(_) => eprintln!(
                        "{id}/{algo}/rep{replication}: done in {:.1}s",
                        started.elapsed().as_secs_f64()
                    ),
                    Err(e) => eprintln!("{id}/{algo}/rep{replication}: FAILED: {e}"),
                }
                RunReport {
                    task: id,
                    algo,
                    replication,
                    seed,
                    outcome,
                }
            })
            .collect()
    });

    let mut metrics = Vec::new();
    for run in &runs {
        if let Ok(done) = &run.outcome {
            for record in &done.trace {
                metrics.push(MetricsRow {
                    task: run.task.as_str().into(),
                    algo: run.algo.as_str().into(),
                    replication: run.replication,
                    record: *record,
                });
            }
        }
    }
    let mut files: Vec<(String, String)> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .flat_map(|d| d.files.iter().cloned())
        .collect();
    let mut text = String::from(METRICS_HEADER);
    text.push('\n');
    for row in &metrics {
        text.push_str(&metrics_line(row));
        text.push('\n');
    }
    let sha = write_atomic(&cfg.output_dir.join(METRICS_FILE), text.as_bytes())?;
    files.push((METRICS_FILE.into(), sha));
    let summary = write_summary(&summarize(&metrics));
    let sha = write_atomic(&cfg.output_dir.join(SUMMARY_FILE), summary.as_bytes())?;
    files.push((SUMMARY_FILE.into(), sha));
    files.sort();

    let manifest = manifest(cfg, &runs, &files);
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write_atomic(&cfg.output_dir.join(MANIFEST_FILE), text.as_bytes())?;

    let failed = runs.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        return Err(BenchError::Incomplete { failed, total });
    }
    Ok(ExperimentReport {
        output_dir: cfg.output_dir.clone(),
        runs,
        metrics,
        files,
    })
}

fn manifest(cfg: &ExperimentConfig, runs: &[RunReport], files: &[(String, String)]) -> Value {
    let runs: Vec<Value> = runs
        .iter()
        .map(|r| {
            let mut v = json!({
                "task": r.task.as_str(),
                "algo": r.algo.as_str(),
                "replication": r.replication,
                "stream_key": format!("{:016x}", r.seed.key),
            });
            match &r.outcome {
                Ok(done) => {
                    v["status"] = json!("complete");
                    v["evaluations_used"] = json!(done.evaluations_used);
                    v["candidates_evaluated"] = json!(done.candidates_evaluated);
                    v["snapshots"] = json!(done.trace.len());
                }
                Err(e) => {
                    v["status"] = json!("incomplete");
                    v["error"] = json!(e);
                }
            }
            v
        })
        .collect();
    json!({
        "tool": "uqd-bench",
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": uqd_core::VERSION,
        "config_sha256": cfg.hash(),
        "config": cfg.canonical(),
        "complete": runs.iter().all(|r| r["status"] == "complete"),
        "seed_derivation": {
            "master_seed": cfg.master_seed,
            "replication": "root(master_seed).derive([task_code, algo_code, replication])",
            "streams": "replication.derive([family, iteration, candidate]).derive([sample]); families: init=1, variation=2, eval=3, reeval=4",
            "reevaluation": "replication.derive([reeval, evaluations_used]).derive([reeval, cell_row, cell_col]).derive([sample])",
            "generator": "ChaCha8, stream id = SplitMix64 hash of the key words",
        },
        "runs": runs,
        "files": files.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect::<Vec<_>>(),
    })
}

/// Re-reads `metrics.csv` under `dir` and rewrites `summary.csv`.
pub fn summarize_dir(dir: &Path) -> Result<PathBuf, BenchError> {
    let path = dir.join(METRICS_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
    let rows = read_metrics(&text)?;
    let out = dir.join(SUMMARY_FILE);
    write_atomic(&out, write_summary(&summarize(&rows)).as_bytes())?;
    Ok(out)
}

/// Standalone corrected-archive pass over an archive file.
pub struct CorrectRequest<'a> {
    pub archive: &'a Path,
    pub task: &'a TaskSpec,
    pub metrics: MetricsConfig,
    pub resolution: (usize, usize),
    pub seed: u64,
    pub out_dir: &'a Path,
}

pub fn correct_archive(req: &CorrectRequest<'_>) -> Result<MetricsRecord, BenchError> {
    let text =
        std::fs::read_to_string(req.archive).map_err(|e| BenchError::io(req.archive, e))?;
    let illusory = read_archive(&text, req.resolution, req.task.qd_offset())?;
    let n_joints = req.task.arm.n_joints();
    if let Some((cell, e)) = illusory.iter().find(|(_, e)| e.genotype.len() != n_joints) {
        return Err(BenchError::Schema(format!(
            "cell {cell:?} has {} genotype columns, task `{}` needs {n_joints}",
            e.genotype.len(),
            req.task.id
        )));
    }
    let (record, corrected) = snapshot(
        &illusory,
        req.task,
        &req.metrics,
        0,
        StreamSeed::root(req.seed),
        &RayonExecutor,
    )?;
    let repro = reproducibility_archive(&corrected, req.metrics.sigma2_ref)?;
    write_atomic(
        &req.out_dir.join("archive_corrected.csv"),
        write_archive(&corrected.archive, n_joints).as_bytes(),
    )?;
    write_atomic(
        &req.out_dir.join("archive_repro.csv"),
        write_reproducibility(&repro).as_bytes(),
    )?;
    Ok(record)
}
