//! Corrected archives and the uncertain-QD metric stack.
//!
//! An optimiser's own archive is *illusory*: elites were placed and ranked
//! on observations that may have been lucky. The corrected archive
//! re-evaluates every elite many times on a dedicated stream family and
//! re-inserts it at its mean descriptor, competing on its mean fitness. The
//! gap between the two archives measures how well an algorithm estimates
//! performance; the spread of the re-evaluated descriptors measures how
//! reproducible its elites are.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::archive::{CellIndex, Elite, EliteStats, GridArchive};
use crate::error::{Error, Result};
use crate::exec::BatchExecutor;
use crate::rng::{family, StreamSeed};
use crate::stats::{self, SampleStats};
use crate::task::TaskSpec;

pub const DEFAULT_REEVALS: usize = 50;

/// Variance of a uniform variable on `[0, 1]`.
pub const DEFAULT_SIGMA2_REF: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsConfig {
    pub n_reeval: usize,
    pub sigma2_ref: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            n_reeval: DEFAULT_REEVALS,
            sigma2_ref: DEFAULT_SIGMA2_REF,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reeval < 2 {
            return Err(Error::Config(format!(
                "n_reeval must be >= 2, got {}",
                self.n_reeval
            )));
        }
        if !(self.sigma2_ref > 0.0 && self.sigma2_ref.is_finite()) {
            return Err(Error::Config(format!(
                "sigma2_ref must be > 0, got {}",
                self.sigma2_ref
            )));
        }
        Ok(())
    }
}

/// One snapshot of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub evaluations_used: u64,
    pub illusory_qd_score: f64,
    pub corrected_qd_score: f64,
    pub illusory_coverage: f64,
    pub corrected_coverage: f64,
    /// Percent.
    pub loss_qd_score: f64,
    /// Percent.
    pub loss_coverage: f64,
    pub reproducibility_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedArchive {
    pub archive: GridArchive,
    /// Corrected cell -> illusory cell it came from.
    sources: BTreeMap<CellIndex, CellIndex>,
}

impl CorrectedArchive {
    pub fn source_of(&self, cell: CellIndex) -> Option<CellIndex> {
        self.sources.get(&cell).copied()
    }

    pub fn len(&self) -> usize {
        self.archive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.archive.is_empty()
    }
}

/// Re-evaluates each illusory elite `n_reeval` times and rebuilds the grid
/// from the sample means.
///
/// Elite at illusory cell `(r, c)` draws from `seed.derive(&[REEVAL, r, c])`.
/// Insertion runs in illusory cell order.
pub fn build_corrected<E: BatchExecutor>(
    illusory: &GridArchive,
    task: &TaskSpec,
    n_reeval: usize,
    seed: StreamSeed,
    exec: &E,
) -> Result<CorrectedArchive> {
    if n_reeval < 2 {
        return Err(Error::Config(format!(
            "n_reeval must be >= 2, got {n_reeval}"
        )));
    }
    let elites: Vec<(CellIndex, &Elite)> = illusory.iter().collect();
    let reevaluated: Vec<Result<SampleStats>> = exec.map_indexed(elites.len(), |k| {
        let ((row, col), elite) = elites[k];
        let stream = seed.derive(&[family::REEVAL, row as u64, col as u64]);
        let samples = task.evaluate_samples(&elite.genotype, n_reeval, stream)?;
        stats::aggregate(&samples)
    });

    let mut archive = illusory.empty_like();
    let mut sources = BTreeMap::new();
    for ((src, elite), s) in elites.into_iter().zip(reevaluated) {
        let s = s?;
        let candidate = Elite {
            genotype: elite.genotype.clone(),
            fitness: s.mean_fitness,
            descriptor: s.mean_descriptor,
            n_samples: n_reeval,
            stats: Some(EliteStats {
                mean_fitness: s.mean_fitness,
                descriptor_variance: s.descriptor_variance,
            }),
        };
        let cell = archive.cell_index(candidate.descriptor)?;
        if archive.try_insert(candidate)?.accepted() {
            sources.insert(cell, src);
        }
    }
    Ok(CorrectedArchive { archive, sources })
}

/// Relative drop from illusory to corrected, in percent. Negative when the
/// corrected archive scores higher; 0 when the illusory value is 0.
pub fn relative_loss(illusory: f64, corrected: f64) -> f64 {
    if illusory == 0.0 {
        0.0
    } else {
        100.0 * (illusory - corrected) / illusory
    }
}

/// `(loss QD-Score %, loss coverage %)`.
pub fn loss_metrics(illusory: &GridArchive, corrected: &CorrectedArchive) -> (f64, f64) {
    (
        relative_loss(illusory.qd_score(), corrected.archive.qd_score()),
        relative_loss(illusory.coverage(), corrected.archive.coverage()),
    )
}

/// Mean per-dimension variance over `sigma2_ref`, clamped to `[0, 1]`.
pub fn normalised_variance(per_dim: [f64; 2], sigma2_ref: f64) -> Result<f64> {
    if !(sigma2_ref > 0.0 && sigma2_ref.is_finite()) {
        return Err(Error::Config(format!(
            "sigma2_ref must be > 0, got {sigma2_ref}"
        )));
    }
    if per_dim.iter().any(|v| *v < 0.0 || v.is_nan()) {
        return Err(Error::Usage(format!(
            "variances must be >= 0, got {per_dim:?}"
        )));
    }
    let mean = 0.5 * (per_dim[0] + per_dim[1]);
    Ok((mean / sigma2_ref).clamp(0.0, 1.0))
}

fn variance_of(elite: &Elite) -> Result<[f64; 2]> {
    elite
        .stats
        .map(|s| s.descriptor_variance)
        .ok_or_else(|| Error::Usage("corrected elite carries no sample statistics".into()))
}

/// Σ over corrected elites of `1 - σ²_norm`.
pub fn reproducibility_score(corrected: &CorrectedArchive, sigma2_ref: f64) -> Result<f64> {
    let mut total = 0.0;
    for (_, e) in corrected.archive.iter() {
        total += 1.0 - normalised_variance(variance_of(e)?, sigma2_ref)?;
    }
    Ok(total)
}

/// Per-cell `1 - σ²_norm`, in cell order.
pub fn reproducibility_archive(
    corrected: &CorrectedArchive,
    sigma2_ref: f64,
) -> Result<Vec<(CellIndex, f64)>> {
    corrected
        .archive
        .iter()
        .map(|(cell, e)| Ok((cell, 1.0 - normalised_variance(variance_of(e)?, sigma2_ref)?)))
        .collect()
}

/// Builds the corrected archive of `illusory` and every metric of one
/// snapshot.
pub fn snapshot<E: BatchExecutor>(
    illusory: &GridArchive,
    task: &TaskSpec,
    cfg: &MetricsConfig,
    evaluations_used: u64,
    seed: StreamSeed,
    exec: &E,
) -> Result<(MetricsRecord, CorrectedArchive)> {
    cfg.validate()?;
    let corrected = build_corrected(illusory, task, cfg.n_reeval, seed, exec)?;
    let (loss_qd_score, loss_coverage) = loss_metrics(illusory, &corrected);
    let record = MetricsRecord {
        evaluations_used,
        illusory_qd_score: illusory.qd_score(),
        corrected_qd_score: corrected.archive.qd_score(),
        illusory_coverage: illusory.coverage(),
        corrected_coverage: corrected.archive.coverage(),
        loss_qd_score,
        loss_coverage,
        reproducibility_score: reproducibility_score(&corrected, cfg.sigma2_ref)?,
    };
    Ok((record, corrected))
}
