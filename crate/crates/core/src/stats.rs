//! Sample aggregation.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::task::Evaluation;

/// Summary of repeated evaluations of one genotype.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean_fitness: f64,
    pub mean_descriptor: [f64; 2],
    /// Population variance per descriptor dimension.
    pub descriptor_variance: [f64; 2],
    pub n: usize,
}

/// Means and population variances; a single sample has variance 0.
pub fn aggregate(samples: &[Evaluation]) -> Result<SampleStats> {
    if samples.is_empty() {
        return Err(Error::Usage("aggregate needs at least one sample".into()));
    }
    let n = samples.len() as f64;
    let first = &samples[0];
    let mean_fitness = shifted_mean(samples, first.fitness, |e| e.fitness);
    let mean = [
        shifted_mean(samples, first.descriptor.0[0], |e| e.descriptor.0[0]),
        shifted_mean(samples, first.descriptor.0[1], |e| e.descriptor.0[1]),
    ];
    let mut var = [0.0; 2];
    for e in samples {
        for k in 0..2 {
            let d = e.descriptor.0[k] - mean[k];
            var[k] += d * d;
        }
    }
    var[0] /= n;
    var[1] /= n;
    Ok(SampleStats {
        mean_fitness,
        mean_descriptor: clamp_unit(mean),
        descriptor_variance: var,
        n: samples.len(),
    })
}

/// Like [`aggregate`] but with medians for the location estimates. The
/// variance is still taken around the mean.
pub fn aggregate_median(samples: &[Evaluation]) -> Result<SampleStats> {
    let mut s = aggregate(samples)?;
    let fit: Vec<f64> = samples.iter().map(|e| e.fitness).collect();
    let dx: Vec<f64> = samples.iter().map(|e| e.descriptor.0[0]).collect();
    let dy: Vec<f64> = samples.iter().map(|e| e.descriptor.0[1]).collect();
    s.mean_fitness = median(fit);
    s.mean_descriptor = clamp_unit([median(dx), median(dy)]);
    Ok(s)
}

// Mean computed around the first sample: exact when all samples agree.
fn shifted_mean(samples: &[Evaluation], pivot: f64, f: impl Fn(&Evaluation) -> f64) -> f64 {
    let n = samples.len() as f64;
    pivot + samples.iter().map(|e| f(e) - pivot).sum::<f64>() / n
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// Means of values in [0, 1] can round a hair outside it.
fn clamp_unit(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)]
}
