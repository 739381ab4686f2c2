//! Noise families and where they enter an evaluation.

use alloc::format;

use crate::arm::angle_variance;
use crate::error::{Error, Result};
use crate::rng::{GaussianSource, RngStream};

/// Location parameter of a distribution: scalar for fitness noise, planar for
/// descriptor noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Center {
    Scalar(f64),
    Planar([f64; 2]),
}

impl Center {
    fn scalar(self) -> Option<f64> {
        match self {
            Center::Scalar(m) => Some(m),
            Center::Planar(_) => None,
        }
    }

    fn planar(self) -> Option<[f64; 2]> {
        match self {
            Center::Planar(m) => Some(m),
            Center::Scalar(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseDistribution {
    None,
    Gaussian {
        mean: Center,
        sigma: f64,
    },
    /// Mode 1 with probability `alpha`, mode 2 otherwise. Isotropic in 2-D.
    Bimodal {
        alpha: f64,
        mode1: Center,
        sigma1: f64,
        mode2: Center,
        sigma2: f64,
    },
    /// Isotropic Gaussian with std `sigma1` when the product of the joint
    /// angles is non-negative and `sigma2` otherwise.
    ConditionalTwoSigma { sigma1: f64, sigma2: f64 },
    /// Isotropic Gaussian with std `eta` times the joint-angle variance.
    ConditionalContinuous { eta: f64 },
}

/// Where noise is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseLocation {
    /// Added to the fitness after evaluation.
    Fitness,
    /// Added to the normalised descriptor after evaluation.
    Descriptor,
    /// Added to joint `j` (1-based) before kinematics.
    PhenotypeDim(usize),
}

/// Mean and per-component variance of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: Center,
    pub variance: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be > 0, got {v}")))
    }
}

impl NoiseDistribution {
    /// Checks the structural invariants: positive scales, `alpha` in `(0, 1)`,
    /// `sigma2 >= 10 * sigma1` for the two-sigma model.
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseDistribution::None => Ok(()),
            NoiseDistribution::Gaussian { sigma, .. } => positive("sigma", sigma),
            NoiseDistribution::Bimodal {
                alpha,
                mode1,
                sigma1,
                mode2,
                sigma2,
            } => {
                positive("sigma1", sigma1)?;
                positive("sigma2", sigma2)?;
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
                }
                if core::mem::discriminant(&mode1) != core::mem::discriminant(&mode2) {
                    return Err(Error::Config("bimodal modes must have the same dimension".into()));
                }
                Ok(())
            }
            NoiseDistribution::ConditionalTwoSigma { sigma1, sigma2 } => {
                positive("sigma1", sigma1)?;
                positive("sigma2", sigma2)?;
                if sigma2 < 10.0 * sigma1 {
                    return Err(Error::Config(format!(
                        "sigma2 must be >= 10 * sigma1, got sigma1 = {sigma1}, sigma2 = {sigma2}"
                    )));
                }
                Ok(())
            }
            NoiseDistribution::ConditionalContinuous { eta } => positive("eta", eta),
        }
    }

    pub fn is_conditional(&self) -> bool {
        matches!(
            self,
            NoiseDistribution::ConditionalTwoSigma { .. }
                | NoiseDistribution::ConditionalContinuous { .. }
        )
    }

    /// One scalar draw.
    pub fn sample_scalar(&self, rng: &mut RngStream) -> Result<f64> {
        match *self {
            NoiseDistribution::None => Ok(0.0),
            NoiseDistribution::Gaussian { mean, sigma } => {
                let m = scalar_mean(mean)?;
                Ok(m + sigma * rng.standard_normal())
            }
            NoiseDistribution::Bimodal {
                alpha,
                mode1,
                sigma1,
                mode2,
                sigma2,
            } => {
                let (m1, m2) = (scalar_mean(mode1)?, scalar_mean(mode2)?);
                let (m, s) = if rng.bernoulli(alpha) {
                    (m1, sigma1)
                } else {
                    (m2, sigma2)
                };
                Ok(m + s * rng.standard_normal())
            }
            _ => Err(conditional_misuse()),
        }
    }

    /// One isotropic 2-D draw.
    pub fn sample_vector2(&self, rng: &mut RngStream) -> Result<[f64; 2]> {
        match *self {
            NoiseDistribution::None => Ok([0.0, 0.0]),
            NoiseDistribution::Gaussian { mean, sigma } => {
                Ok(isotropic(planar_mean(mean)?, sigma, rng))
            }
            NoiseDistribution::Bimodal {
                alpha,
                mode1,
                sigma1,
                mode2,
                sigma2,
            } => {
                let (m1, m2) = (planar_mean(mode1)?, planar_mean(mode2)?);
                Ok(if rng.bernoulli(alpha) {
                    isotropic(m1, sigma1, rng)
                } else {
                    isotropic(m2, sigma2, rng)
                })
            }
            _ => Err(conditional_misuse()),
        }
    }

    /// One 2-D draw whose scale depends on the joint angles.
    pub fn sample_conditional(&self, angles: &[f64], rng: &mut RngStream) -> Result<[f64; 2]> {
        let sigma = self.conditional_sigma(angles)?;
        Ok(isotropic([0.0, 0.0], sigma, rng))
    }

    /// Standard deviation a conditional model assigns to `angles`.
    pub fn conditional_sigma(&self, angles: &[f64]) -> Result<f64> {
        match *self {
            NoiseDistribution::ConditionalTwoSigma { sigma1, sigma2 } => {
                Ok(if product_sign_non_negative(angles) {
                    sigma1
                } else {
                    sigma2
                })
            }
            NoiseDistribution::ConditionalContinuous { eta } => Ok(eta * angle_variance(angles)),
            _ => Err(Error::Usage(
                "sample_conditional needs a conditional distribution".into(),
            )),
        }
    }

    /// Closed-form mean and per-component variance; `None` for conditional
    /// models, whose moments depend on the genotype.
    pub fn analytic_expectation(&self) -> Option<Moments> {
        match *self {
            NoiseDistribution::None => Some(Moments {
                mean: Center::Scalar(0.0),
                variance: 0.0,
            }),
            NoiseDistribution::Gaussian { mean, sigma } => Some(Moments {
                mean,
                variance: sigma * sigma,
            }),
            NoiseDistribution::Bimodal {
                alpha,
                mode1,
                sigma1,
                mode2,
                sigma2,
            } => {
                let beta = 1.0 - alpha;
                // E[X²] - E[X]² per component; see `planar_variance` when
                // the components differ.
                let mix = |m1: f64, m2: f64| {
                    let mean = alpha * m1 + beta * m2;
                    let second =
                        alpha * (sigma1 * sigma1 + m1 * m1) + beta * (sigma2 * sigma2 + m2 * m2);
                    (mean, second - mean * mean)
                };
                match (mode1, mode2) {
                    (Center::Scalar(a), Center::Scalar(b)) => {
                        let (mean, variance) = mix(a, b);
                        Some(Moments {
                            mean: Center::Scalar(mean),
                            variance,
                        })
                    }
                    (Center::Planar(a), Center::Planar(b)) => {
                        let (mx, vx) = mix(a[0], b[0]);
                        let (my, _) = mix(a[1], b[1]);
                        Some(Moments {
                            mean: Center::Planar([mx, my]),
                            variance: vx,
                        })
                    }
                    _ => None,
                }
            }
            NoiseDistribution::ConditionalTwoSigma { .. }
            | NoiseDistribution::ConditionalContinuous { .. } => None,
        }
    }

    /// Per-component variance of a planar distribution, component by
    /// component.
    pub fn planar_variance(&self) -> Option<[f64; 2]> {
        match *self {
            NoiseDistribution::None => Some([0.0, 0.0]),
            NoiseDistribution::Gaussian { sigma, .. } => Some([sigma * sigma; 2]),
            NoiseDistribution::Bimodal {
                alpha,
                mode1: Center::Planar(a),
                sigma1,
                mode2: Center::Planar(b),
                sigma2,
            } => {
                let beta = 1.0 - alpha;
                let comp = |m1: f64, m2: f64| {
                    let mean = alpha * m1 + beta * m2;
                    alpha * (sigma1 * sigma1 + m1 * m1) + beta * (sigma2 * sigma2 + m2 * m2)
                        - mean * mean
                };
                Some([comp(a[0], b[0]), comp(a[1], b[1])])
            }
            _ => None,
        }
    }
}

/// `sign(∏ θ_j) >= 0`, with a zero angle counting as non-negative.
pub fn product_sign_non_negative(angles: &[f64]) -> bool {
    if angles.contains(&0.0) {
        return true;
    }
    angles.iter().filter(|&&a| a < 0.0).count() % 2 == 0
}

fn isotropic(mean: [f64; 2], sigma: f64, rng: &mut RngStream) -> [f64; 2] {
    let zx = rng.standard_normal();
    let zy = rng.standard_normal();
    [mean[0] + sigma * zx, mean[1] + sigma * zy]
}

fn scalar_mean(c: Center) -> Result<f64> {
    c.scalar()
        .ok_or_else(|| Error::Usage("sample_scalar needs scalar means".into()))
}

fn planar_mean(c: Center) -> Result<[f64; 2]> {
    c.planar()
        .ok_or_else(|| Error::Usage("sample_vector2 needs 2-D means".into()))
}

fn conditional_misuse() -> Error {
    Error::Usage("conditional distributions need a genotype; use sample_conditional".into())
}
