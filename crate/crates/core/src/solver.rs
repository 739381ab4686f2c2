//! MAP-Elites baselines.
//!
//! All three algorithms share one generate / evaluate / insert loop and
//! differ only in how many samples a candidate gets and which score it
//! competes on:
//!
//! | algo                 | samples | competes on                          |
//! |----------------------|---------|--------------------------------------|
//! | `me`                 | 1       | observed fitness                     |
//! | `me-sampling`        | n       | mean fitness                         |
//! | `me-sampling-repro`  | n       | minus summed descriptor variance     |
//!
//! Elites are stored at their mean descriptor. The evaluation budget counts
//! raw evaluations, so a sampling candidate costs `n`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::archive::{Elite, EliteStats, GridArchive, DEFAULT_RESOLUTION};
use crate::arm::{ArmConfig, Genotype};
use crate::error::{Error, Result};
use crate::exec::{BatchExecutor, Sequential};
use crate::metrics::{self, CorrectedArchive, MetricsConfig, MetricsRecord};
use crate::rng::{family, GaussianSource, RngStream, StreamSeed};
use crate::stats::{self, SampleStats};
use crate::task::TaskSpec;

pub use crate::stats::aggregate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algo {
    Me,
    MeSampling,
    MeSamplingRepro,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Me, Algo::MeSampling, Algo::MeSamplingRepro];

    pub const fn as_str(self) -> &'static str {
        match self {
            Algo::Me => "me",
            Algo::MeSampling => "me-sampling",
            Algo::MeSamplingRepro => "me-sampling-repro",
        }
    }

    /// Stable numeric code used in stream keys.
    pub const fn code(self) -> u64 {
        match self {
            Algo::Me => 0,
            Algo::MeSampling => 1,
            Algo::MeSamplingRepro => 2,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Location estimator used when aggregating samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationParams {
    pub sigma_iso: f64,
    pub sigma_line: f64,
}

impl Default for VariationParams {
    fn default() -> Self {
        Self {
            sigma_iso: 0.01,
            sigma_line: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algo: Algo,
    /// Samples per candidate for the sampling variants; `me` always uses 1.
    pub n_samples: usize,
    pub batch_size: usize,
    pub init_batch: usize,
    pub eval_budget: u64,
    pub variation: VariationParams,
    /// Iterations between metric snapshots; 0 keeps only the final one.
    pub metric_period: usize,
    pub resolution: (usize, usize),
    pub aggregation: Aggregation,
    pub metrics: MetricsConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Me,
            n_samples: 30,
            batch_size: 64,
            init_batch: 128,
            eval_budget: 1_000_000,
            variation: VariationParams::default(),
            metric_period: 500,
            resolution: DEFAULT_RESOLUTION,
            aggregation: Aggregation::Mean,
            metrics: MetricsConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn for_algo(algo: Algo) -> Self {
        Self {
            algo,
            ..Self::default()
        }
    }

    /// Samples actually drawn per candidate.
    pub fn effective_samples(&self) -> usize {
        match self.algo {
            Algo::Me => 1,
            Algo::MeSampling | Algo::MeSamplingRepro => self.n_samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_samples", self.n_samples),
            ("batch_size", self.batch_size),
            ("init_batch", self.init_batch),
            ("resolution rows", self.resolution.0),
            ("resolution cols", self.resolution.1),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        let init_cost = (self.init_batch * self.effective_samples()) as u64;
        if self.eval_budget < init_cost {
            return Err(Error::Config(format!(
                "eval_budget {} is smaller than the initial batch cost {} ({} candidates x {} samples)",
                self.eval_budget,
                init_cost,
                self.init_batch,
                self.effective_samples()
            )));
        }
        let VariationParams {
            sigma_iso,
            sigma_line,
        } = self.variation;
        if !(sigma_iso >= 0.0 && sigma_line >= 0.0 && sigma_iso.is_finite() && sigma_line.is_finite())
        {
            return Err(Error::Config("variation sigmas must be finite and >= 0".into()));
        }
        self.metrics.validate()
    }
}

/// Metric snapshots of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub records: Vec<MetricsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Final illusory archive.
    pub archive: GridArchive,
    /// Corrected archive of the final snapshot.
    pub corrected: CorrectedArchive,
    pub trace: RunTrace,
    pub evaluations_used: u64,
    pub candidates_evaluated: u64,
}

/// Iso+LineDD: `p1 + σ_iso·range·z + σ_line·z'·(p2 - p1)`, clipped to the
/// bounds. Draws one iso variate per joint, then the line variate.
pub fn iso_line_variation<G: GaussianSource>(
    p1: &[f64],
    p2: &[f64],
    bounds: (f64, f64),
    params: VariationParams,
    src: &mut G,
) -> Result<Genotype> {
    if p1.len() != p2.len() {
        return Err(Error::Usage(format!(
            "parents differ in length: {} vs {}",
            p1.len(),
            p2.len()
        )));
    }
    let (lo, hi) = bounds;
    let range = hi - lo;
    let mut child: Vec<f64> = p1
        .iter()
        .map(|&a| a + params.sigma_iso * range * src.standard_normal())
        .collect();
    let line = params.sigma_line * src.standard_normal();
    for ((c, &a), &b) in child.iter_mut().zip(p1).zip(p2) {
        *c = (*c + line * (b - a)).clamp(lo, hi);
    }
    Ok(Genotype::from_vec(child))
}

/// Score an aggregated candidate competes on.
pub fn competition_score(algo: Algo, stats: &SampleStats) -> f64 {
    match algo {
        Algo::Me | Algo::MeSampling => stats.mean_fitness,
        Algo::MeSamplingRepro => -(stats.descriptor_variance[0] + stats.descriptor_variance[1]),
    }
}

fn random_genotype(arm: &ArmConfig, rng: &mut RngStream) -> Genotype {
    let (lo, hi) = arm.angle_bounds();
    Genotype::from_vec((0..arm.n_joints()).map(|_| rng.uniform_in(lo, hi)).collect())
}

/// Runs one seeded experiment sequentially.
pub fn run(task: &TaskSpec, cfg: &SolverConfig, seed: impl Into<StreamSeed>) -> Result<RunOutput> {
    run_with(task, cfg, seed, &Sequential)
}

/// Runs one seeded experiment, evaluating batches on `exec`.
///
/// Every random decision is keyed by `(family, iteration, candidate,
/// sample)` under `seed`, so the output does not depend on `exec`.
pub fn run_with<E: BatchExecutor>(
    task: &TaskSpec,
    cfg: &SolverConfig,
    seed: impl Into<StreamSeed>,
    exec: &E,
) -> Result<RunOutput> {
    cfg.validate()?;
    let seed = seed.into();
    let n = cfg.effective_samples();
    let cost = |candidates: usize| (candidates * n) as u64;
    let (rows, cols) = cfg.resolution;
    let mut archive = GridArchive::new(rows, cols, task.qd_offset())?;
    let mut used = 0u64;
    let mut candidates = 0u64;
    let mut trace = RunTrace::default();
    let mut last_corrected = None;

    let insert_batch = |archive: &mut GridArchive, iteration: u64, batch: Vec<Genotype>| {
        let scored: Vec<Result<SampleStats>> = exec.map_indexed(batch.len(), |c| {
            let stream = seed.derive(&[family::EVAL, iteration, c as u64]);
            let samples = task.evaluate_samples(&batch[c], n, stream)?;
            match cfg.aggregation {
                Aggregation::Mean => stats::aggregate(&samples),
                Aggregation::Median => stats::aggregate_median(&samples),
            }
        });
        for (genotype, s) in batch.into_iter().zip(scored) {
            let s = s?;
            archive.try_insert(Elite {
                genotype,
                fitness: competition_score(cfg.algo, &s),
                descriptor: s.mean_descriptor,
                n_samples: n,
                stats: Some(EliteStats {
                    mean_fitness: s.mean_fitness,
                    descriptor_variance: s.descriptor_variance,
                }),
            })?;
        }
        Ok::<_, Error>(())
    };
    let snapshot = |archive: &GridArchive, used: u64| {
        metrics::snapshot(
            archive,
            task,
            &cfg.metrics,
            used,
            seed.derive(&[family::REEVAL, used]),
            exec,
        )
    };

    let init: Vec<Genotype> = exec.map_indexed(cfg.init_batch, |c| {
        random_genotype(&task.arm, &mut seed.derive(&[family::INIT, c as u64]).stream())
    });
    insert_batch(&mut archive, 0, init)?;
    used += cost(cfg.init_batch);
    candidates += cfg.init_batch as u64;
    if cfg.metric_period > 0 {
        let (record, corrected) = snapshot(&archive, used)?;
        trace.records.push(record);
        last_corrected = Some(corrected);
    }

    let mut iteration = 0u64;
    while used + cost(cfg.batch_size) <= cfg.eval_budget {
        iteration += 1;
        let parents = &archive;
        let batch: Vec<Result<Genotype>> = exec.map_indexed(cfg.batch_size, |c| {
            let mut rng = seed
                .derive(&[family::VARIATION, iteration, c as u64])
                .stream();
            let p1 = parents.sample_uniform_elite(&mut rng)?;
            let p2 = parents.sample_uniform_elite(&mut rng)?;
            iso_line_variation(
                &p1.genotype,
                &p2.genotype,
                task.arm.angle_bounds(),
                cfg.variation,
                &mut rng,
            )
        });
        let batch = batch.into_iter().collect::<Result<Vec<_>>>()?;
        insert_batch(&mut archive, iteration, batch)?;
        used += cost(cfg.batch_size);
        candidates += cfg.batch_size as u64;
        if cfg.metric_period > 0 && iteration % cfg.metric_period as u64 == 0 {
            let (record, corrected) = snapshot(&archive, used)?;
            trace.records.push(record);
            last_corrected = Some(corrected);
        }
    }
    let corrected = match last_corrected {
        Some(c) if trace.records.last().map(|r| r.evaluations_used) == Some(used) => c,
        _ => {
            let (record, corrected) = snapshot(&archive, used)?;
            trace.records.push(record);
            corrected
        }
    };

    Ok(RunOutput {
        archive,
        corrected,
        trace,
        evaluations_used: used,
        candidates_evaluated: candidates,
    })
}

impl From<u64> for StreamSeed {
    fn from(master: u64) -> Self {
        StreamSeed::root(master)
    }
}
