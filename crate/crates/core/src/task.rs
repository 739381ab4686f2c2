//! Benchmark task catalogue.
//!
//! A task binds the arm to one noise model at one location. Five tasks
//! estimate performance under fitness or descriptor noise, two reward
//! reproducible descriptors, one perturbs a single joint before kinematics,
//! and a noise-free task serves as the reference fixture.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::arm::{ArmConfig, Descriptor, FitnessMode, DEFAULT_JOINTS};
use crate::error::{Error, Result};
use crate::noise::{Center, NoiseDistribution, NoiseLocation};
use crate::rng::{family, RngStream, StreamSeed};
use crate::stats;

/// Named parameter overrides, e.g. `{"sigma": 0.015}`.
pub type TaskOverrides = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskId {
    NoiseFree,
    GaussFit,
    BimodalFit,
    SmallGaussDesc,
    LargeGaussDesc,
    BimodalDesc,
    TwoSigmaDesc,
    ContinuousSigmaDesc,
    PhenoJ,
}

/// Which family of benchmark a task belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Reference,
    PerformanceEstimation,
    ReproducibilityMaximisation,
    Realistic,
}

/// A tunable parameter of a task and the constraint it must satisfy.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub constraint: &'static str,
    check: fn(f64) -> bool,
}

impl ParamSpec {
    pub fn admits(&self, v: f64) -> bool {
        v.is_finite() && (self.check)(v)
    }
}

const fn param(
    name: &'static str,
    default: f64,
    constraint: &'static str,
    check: fn(f64) -> bool,
) -> ParamSpec {
    ParamSpec {
        name,
        default,
        constraint,
        check,
    }
}

fn gt0(v: f64) -> bool {
    v > 0.0
}
fn unit_open(v: f64) -> bool {
    v > 0.0 && v < 1.0
}
fn small_sigma(v: f64) -> bool {
    v > 0.0 && v < 0.02
}
fn large_sigma(v: f64) -> bool {
    v > 0.1
}
fn joint_count(v: f64) -> bool {
    v >= 2.0 && libm::trunc(v) == v && v <= 1024.0
}
fn joint_index(v: f64) -> bool {
    v >= 1.0 && libm::trunc(v) == v
}

const N_JOINTS: ParamSpec = param(
    "n_joints",
    DEFAULT_JOINTS as f64,
    "n_joints integer >= 2",
    joint_count,
);

const NO_PARAMS: &[ParamSpec] = &[N_JOINTS];
const GAUSS_FIT: &[ParamSpec] = &[N_JOINTS, param("sigma", 0.5, "sigma > 0", gt0)];
const BIMODAL: &[ParamSpec] = &[
    N_JOINTS,
    param("alpha", 0.95, "alpha in (0, 1)", unit_open),
    param("sigma1", 0.05, "sigma1 > 0", gt0),
    param("sigma2", 0.05, "sigma2 > 0", gt0),
];
const BIMODAL_DESC: &[ParamSpec] = &[
    N_JOINTS,
    param("alpha", 0.95, "alpha in (0, 1)", unit_open),
    param("sigma1", 0.01, "sigma1 > 0", gt0),
    param("sigma2", 0.01, "sigma2 > 0", gt0),
];
const SMALL_GAUSS: &[ParamSpec] = &[
    N_JOINTS,
    param("sigma", 0.01, "sigma in (0, 0.02)", small_sigma),
];
const LARGE_GAUSS: &[ParamSpec] = &[N_JOINTS, param("sigma", 0.15, "sigma > 0.1", large_sigma)];
const TWO_SIGMA: &[ParamSpec] = &[
    N_JOINTS,
    param("sigma1", 0.001, "sigma2 >> sigma1 > 0", gt0),
    param("sigma2", 0.05, "sigma2 >> sigma1 > 0", gt0),
];
const TWO_SIGMA_RATIO: &str = "sigma2 >> sigma1 > 0 (sigma2 >= 10 * sigma1)";
const CONTINUOUS: &[ParamSpec] = &[N_JOINTS, param("eta", 0.02, "eta > 0", gt0)];
const PHENO: &[ParamSpec] = &[
    N_JOINTS,
    param("j", 6.0, "j integer in [1, n_joints]", joint_index),
    param("sigma", 0.2, "sigma > 0", gt0),
];

impl TaskId {
    pub const ALL: [TaskId; 9] = [
        TaskId::NoiseFree,
        TaskId::GaussFit,
        TaskId::BimodalFit,
        TaskId::SmallGaussDesc,
        TaskId::LargeGaussDesc,
        TaskId::BimodalDesc,
        TaskId::TwoSigmaDesc,
        TaskId::ContinuousSigmaDesc,
        TaskId::PhenoJ,
    ];

    /// Stable CLI identifier.
    pub const fn as_str(self) -> &'static str {
        match self {
            TaskId::NoiseFree => "noise-free",
            TaskId::GaussFit => "gaussian-fitness",
            TaskId::BimodalFit => "bimodal-fitness",
            TaskId::SmallGaussDesc => "small-gaussian-descriptor",
            TaskId::LargeGaussDesc => "large-gaussian-descriptor",
            TaskId::BimodalDesc => "bimodal-descriptor",
            TaskId::TwoSigmaDesc => "two-sigma-descriptor",
            TaskId::ContinuousSigmaDesc => "continuous-sigma-descriptor",
            TaskId::PhenoJ => "pheno-j",
        }
    }

    pub const fn title(self) -> &'static str {
        match self {
            TaskId::NoiseFree => "Noise-free reference",
            TaskId::GaussFit => "Gaussian fitness noise",
            TaskId::BimodalFit => "Bimodal fitness noise",
            TaskId::SmallGaussDesc => "Small-Gaussian descriptor noise",
            TaskId::LargeGaussDesc => "Large-Gaussian descriptor noise",
            TaskId::BimodalDesc => "Bimodal descriptor noise",
            TaskId::TwoSigmaDesc => "Gaussian descriptor noise with 2 variance values",
            TaskId::ContinuousSigmaDesc => "Gaussian descriptor noise with continuous variance",
            TaskId::PhenoJ => "Gaussian phenotype J noise",
        }
    }

    /// Stable numeric code used in stream keys.
    pub const fn code(self) -> u64 {
        match self {
            TaskId::NoiseFree => 0,
            TaskId::GaussFit => 1,
            TaskId::BimodalFit => 2,
            TaskId::SmallGaussDesc => 3,
            TaskId::LargeGaussDesc => 4,
            TaskId::BimodalDesc => 5,
            TaskId::TwoSigmaDesc => 6,
            TaskId::ContinuousSigmaDesc => 7,
            TaskId::PhenoJ => 8,
        }
    }

    pub const fn category(self) -> Category {
        match self {
            TaskId::NoiseFree => Category::Reference,
            TaskId::GaussFit
            | TaskId::BimodalFit
            | TaskId::SmallGaussDesc
            | TaskId::LargeGaussDesc
            | TaskId::BimodalDesc => Category::PerformanceEstimation,
            TaskId::TwoSigmaDesc | TaskId::ContinuousSigmaDesc => {
                Category::ReproducibilityMaximisation
            }
            TaskId::PhenoJ => Category::Realistic,
        }
    }

    /// Tunable parameters with defaults and constraints.
    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            TaskId::NoiseFree => NO_PARAMS,
            TaskId::GaussFit => GAUSS_FIT,
            TaskId::BimodalFit => BIMODAL,
            TaskId::SmallGaussDesc => SMALL_GAUSS,
            TaskId::LargeGaussDesc => LARGE_GAUSS,
            TaskId::BimodalDesc => BIMODAL_DESC,
            TaskId::TwoSigmaDesc => TWO_SIGMA,
            TaskId::ContinuousSigmaDesc => CONTINUOUS,
            TaskId::PhenoJ => PHENO,
        }
    }

    pub fn fitness_mode(self) -> FitnessMode {
        match self.category() {
            Category::Reference | Category::PerformanceEstimation => FitnessMode::NegJointVariance,
            Category::ReproducibilityMaximisation | Category::Realistic => FitnessMode::Zero,
        }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown task `{s}`")))
    }
}

/// One stochastic observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub descriptor: Descriptor,
}

/// Expected fitness and descriptor of a genotype, with the per-dimension
/// descriptor variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedEvaluation {
    pub fitness: f64,
    pub descriptor: [f64; 2],
    pub descriptor_variance: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub arm: ArmConfig,
    pub location: NoiseLocation,
    pub dist: NoiseDistribution,
    /// Resolved parameter values, in catalogue order.
    pub params: Vec<(&'static str, f64)>,
}

impl TaskSpec {
    /// Resolves defaults and overrides and checks every constraint.
    pub fn new(id: TaskId, overrides: &TaskOverrides) -> Result<Self> {
        let specs = id.params();
        for key in overrides.keys() {
            if !specs.iter().any(|p| p.name == key) {
                return Err(Error::UnknownParam {
                    task: id.as_str(),
                    param: key.clone(),
                });
            }
        }
        let mut params = Vec::with_capacity(specs.len());
        for p in specs {
            let value = overrides.get(p.name).copied().unwrap_or(p.default);
            if !p.admits(value) {
                return Err(Error::Constraint {
                    task: id.as_str(),
                    param: p.name.into(),
                    value,
                    constraint: p.constraint,
                });
            }
            params.push((p.name, value));
        }
        let get = |name: &str| {
            params
                .iter()
                .find(|(n, _)| *n == name)
                .map(|&(_, v)| v)
                .expect("catalogue parameter")
        };

        let n_joints = get("n_joints") as usize;
        let arm = ArmConfig::uniform(n_joints, id.fitness_mode())?;

        let (location, dist) = match id {
            TaskId::NoiseFree => (NoiseLocation::Fitness, NoiseDistribution::None),
            TaskId::GaussFit => (
                NoiseLocation::Fitness,
                NoiseDistribution::Gaussian {
                    mean: Center::Scalar(0.0),
                    sigma: get("sigma"),
                },
            ),
            TaskId::BimodalFit => (
                NoiseLocation::Fitness,
                NoiseDistribution::Bimodal {
                    alpha: get("alpha"),
                    mode1: Center::Scalar(0.0),
                    sigma1: get("sigma1"),
                    mode2: Center::Scalar(-1.0),
                    sigma2: get("sigma2"),
                },
            ),
            TaskId::SmallGaussDesc | TaskId::LargeGaussDesc => (
                NoiseLocation::Descriptor,
                NoiseDistribution::Gaussian {
                    mean: Center::Planar([0.0, 0.0]),
                    sigma: get("sigma"),
                },
            ),
            TaskId::BimodalDesc => (
                NoiseLocation::Descriptor,
                NoiseDistribution::Bimodal {
                    alpha: get("alpha"),
                    mode1: Center::Planar([0.0, 0.0]),
                    sigma1: get("sigma1"),
                    mode2: Center::Planar([1.0, 1.0]),
                    sigma2: get("sigma2"),
                },
            ),
            TaskId::TwoSigmaDesc => {
                let (s1, s2) = (get("sigma1"), get("sigma2"));
                if s2 < 10.0 * s1 {
                    return Err(Error::Constraint {
                        task: id.as_str(),
                        param: "sigma2".into(),
                        value: s2,
                        constraint: TWO_SIGMA_RATIO,
                    });
                }
                (
                    NoiseLocation::Descriptor,
                    NoiseDistribution::ConditionalTwoSigma {
                        sigma1: s1,
                        sigma2: s2,
                    },
                )
            }
            TaskId::ContinuousSigmaDesc => (
                NoiseLocation::Descriptor,
                NoiseDistribution::ConditionalContinuous { eta: get("eta") },
            ),
            TaskId::PhenoJ => {
                let j = get("j");
                if j as usize > n_joints {
                    return Err(Error::Constraint {
                        task: id.as_str(),
                        param: "j".into(),
                        value: j,
                        constraint: "j integer in [1, n_joints]",
                    });
                }
                (
                    NoiseLocation::PhenotypeDim(j as usize),
                    NoiseDistribution::Gaussian {
                        mean: Center::Scalar(0.0),
                        sigma: get("sigma"),
                    },
                )
            }
        };
        dist.validate()?;
        Ok(Self {
            id,
            arm,
            location,
            dist,
            params,
        })
    }

    /// Task with every parameter at its default.
    pub fn with_defaults(id: TaskId) -> Self {
        Self::new(id, &TaskOverrides::new()).expect("catalogue defaults are valid")
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }

    /// QD-Score offset: the largest possible fitness magnitude for the
    /// negative-variance fitness, 1 for zero-fitness tasks.
    pub fn qd_offset(&self) -> f64 {
        match self.arm.fitness_mode() {
            FitnessMode::NegJointVariance => self.arm.max_variance(),
            FitnessMode::Zero => 1.0,
        }
    }

    /// One stochastic evaluation of `angles`, drawing noise from `rng`.
    pub fn evaluate(&self, angles: &[f64], rng: &mut RngStream) -> Result<Evaluation> {
        self.arm.check_len(angles)?;
        match self.location {
            NoiseLocation::Fitness => {
                let fitness = self.arm.fitness(angles)? + self.dist.sample_scalar(rng)?;
                Ok(Evaluation {
                    fitness,
                    descriptor: self.arm.descriptor(angles)?,
                })
            }
            NoiseLocation::Descriptor => {
                let clean = self.arm.descriptor(angles)?;
                let eps = if self.dist.is_conditional() {
                    self.dist.sample_conditional(angles, rng)?
                } else {
                    self.dist.sample_vector2(rng)?
                };
                Ok(Evaluation {
                    fitness: self.arm.fitness(angles)?,
                    descriptor: Descriptor::clamped([clean.0[0] + eps[0], clean.0[1] + eps[1]]),
                })
            }
            NoiseLocation::PhenotypeDim(j) => {
                let mut perturbed: Vec<f64> = angles.to_vec();
                perturbed[j - 1] += self.dist.sample_scalar(rng)?;
                Ok(Evaluation {
                    fitness: self.arm.fitness(&perturbed)?,
                    descriptor: self.arm.descriptor(&perturbed)?,
                })
            }
        }
    }

    /// `n` evaluations, sample `i` on the stream `seed.derive(&[i])`.
    pub fn evaluate_samples(
        &self,
        angles: &[f64],
        n: usize,
        seed: StreamSeed,
    ) -> Result<Vec<Evaluation>> {
        if n == 0 {
            return Err(Error::Usage("evaluate_samples needs n >= 1".into()));
        }
        (0..n)
            .map(|i| self.evaluate(angles, &mut seed.derive(&[i as u64]).stream()))
            .collect()
    }

    /// Expected evaluation of `angles`.
    ///
    /// Additive fitness or descriptor noise uses the closed form (the clamp
    /// at the descriptor bounds is ignored). Conditional and phenotype noise
    /// fall back to `n_oracle` Monte-Carlo draws on a reserved stream family.
    pub fn expected_evaluation(
        &self,
        angles: &[f64],
        n_oracle: usize,
        seed: StreamSeed,
    ) -> Result<ExpectedEvaluation> {
        let fitness = self.arm.fitness(angles)?;
        let clean = self.arm.descriptor(angles)?.0;
        let closed = match (self.location, self.dist.analytic_expectation()) {
            (NoiseLocation::Fitness, Some(m)) => {
                let shift = match m.mean {
                    Center::Scalar(v) => v,
                    Center::Planar(_) => return Err(Error::Usage("fitness noise must be scalar".into())),
                };
                Some(ExpectedEvaluation {
                    fitness: fitness + shift,
                    descriptor: clean,
                    descriptor_variance: [0.0, 0.0],
                })
            }
            (NoiseLocation::Descriptor, Some(m)) => {
                let shift = match m.mean {
                    Center::Planar(v) => v,
                    Center::Scalar(_) => [0.0, 0.0],
                };
                Some(ExpectedEvaluation {
                    fitness,
                    descriptor: [clean[0] + shift[0], clean[1] + shift[1]],
                    descriptor_variance: self.dist.planar_variance().unwrap_or([0.0, 0.0]),
                })
            }
            _ => None,
        };
        if let Some(e) = closed {
            return Ok(e);
        }
        let samples =
            self.evaluate_samples(angles, n_oracle.max(1), seed.derive(&[family::ORACLE]))?;
        let s = stats::aggregate(&samples)?;
        Ok(ExpectedEvaluation {
            fitness: s.mean_fitness,
            descriptor: s.mean_descriptor,
            descriptor_variance: s.descriptor_variance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn overrides(pairs: &[(&str, f64)]) -> TaskOverrides {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn defaults_match_catalogue() {
        let small = TaskSpec::with_defaults(TaskId::SmallGaussDesc);
        assert_eq!(small.param("sigma"), Some(0.01));
        let large = TaskSpec::with_defaults(TaskId::LargeGaussDesc);
        assert_eq!(large.param("sigma"), Some(0.15));
        let pheno = TaskSpec::with_defaults(TaskId::PhenoJ);
        assert_eq!(pheno.location, NoiseLocation::PhenotypeDim(6));
        assert_eq!(pheno.arm.fitness_mode(), FitnessMode::Zero);
        assert_eq!(
            TaskSpec::with_defaults(TaskId::BimodalDesc).arm.fitness_mode(),
            FitnessMode::NegJointVariance
        );
        for id in TaskId::ALL {
            let t = TaskSpec::with_defaults(id);
            assert_eq!(t.arm.n_joints(), 8);
            assert_eq!(id.as_str().parse::<TaskId>().unwrap(), id);
        }
    }

    #[test]
    fn constraint_violations_name_the_constraint() {
        let err = TaskSpec::new(TaskId::SmallGaussDesc, &overrides(&[("sigma", 0.05)])).unwrap_err();
        match err {
            Error::Constraint { constraint, .. } => assert_eq!(constraint, "sigma in (0, 0.02)"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(TaskSpec::new(TaskId::GaussFit, &overrides(&[("sigma", -1.0)])).is_err());
        assert!(TaskSpec::new(TaskId::LargeGaussDesc, &overrides(&[("sigma", 0.1)])).is_err());
        assert!(TaskSpec::new(TaskId::BimodalFit, &overrides(&[("alpha", 1.0)])).is_err());
        assert!(TaskSpec::new(TaskId::TwoSigmaDesc, &overrides(&[("sigma2", 0.005)])).is_err());
        assert!(TaskSpec::new(TaskId::PhenoJ, &overrides(&[("j", 9.0)])).is_err());
        assert!(TaskSpec::new(TaskId::PhenoJ, &overrides(&[("j", 2.5)])).is_err());
        assert!(matches!(
            TaskSpec::new(TaskId::GaussFit, &overrides(&[("eta", 1.0)])),
            Err(Error::UnknownParam { .. })
        ));
        let t = TaskSpec::new(TaskId::PhenoJ, &overrides(&[("n_joints", 10.0), ("j", 10.0)])).unwrap();
        assert_eq!(t.arm.n_joints(), 10);
    }

    #[test]
    fn fitness_noise_leaves_descriptor_untouched() {
        let t = TaskSpec::with_defaults(TaskId::GaussFit);
        let g = vec![0.3, -0.2, 0.1, 0.5, -1.0, 2.0, 0.0, 1.5];
        let a = t.evaluate(&g, &mut RngStream::new(1, 1)).unwrap();
        let b = t.evaluate(&g, &mut RngStream::new(1, 2)).unwrap();
        assert_eq!(a.descriptor, b.descriptor);
        assert_ne!(a.fitness, b.fitness);
    }

    #[test]
    fn zero_fitness_tasks_are_exactly_zero() {
        let g = vec![0.3, -0.2, 0.1, 0.5, -1.0, 2.0, 0.0, 1.5];
        for id in [TaskId::TwoSigmaDesc, TaskId::ContinuousSigmaDesc, TaskId::PhenoJ] {
            let t = TaskSpec::with_defaults(id);
            for e in t.evaluate_samples(&g, 50, StreamSeed::root(3)).unwrap() {
                assert_eq!(e.fitness, 0.0);
            }
        }
    }

    #[test]
    fn noise_free_ignores_the_stream() {
        let t = TaskSpec::with_defaults(TaskId::NoiseFree);
        let g = vec![0.3, -0.2, 0.1, 0.5, -1.0, 2.0, 0.0, 1.5];
        let a = t.evaluate(&g, &mut RngStream::new(1, 1)).unwrap();
        let b = t.evaluate(&g, &mut RngStream::new(2, 9)).unwrap();
        assert_eq!(a, b);
        let all = t.evaluate_samples(&g, 30, StreamSeed::root(5)).unwrap();
        assert!(all.iter().all(|e| *e == a));
        let exp = t.expected_evaluation(&g, 10, StreamSeed::root(0)).unwrap();
        assert_eq!(exp.fitness, a.fitness);
        assert_eq!(exp.descriptor, a.descriptor.0);
        assert_eq!(exp.descriptor_variance, [0.0, 0.0]);
    }

    #[test]
    fn single_sample_matches_direct_call() {
        let t = TaskSpec::with_defaults(TaskId::LargeGaussDesc);
        let g = vec![0.1; 8];
        let seed = StreamSeed::root(77).derive(&[4, 5]);
        let one = t.evaluate_samples(&g, 1, seed).unwrap();
        let direct = t.evaluate(&g, &mut seed.derive(&[0]).stream()).unwrap();
        assert_eq!(one, vec![direct]);
        assert!(t.evaluate_samples(&g, 0, seed).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = TaskSpec::with_defaults(TaskId::PhenoJ);
        assert!(matches!(
            t.evaluate(&[0.0; 3], &mut RngStream::new(0, 0)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn bimodal_fitness_expectation() {
        let t = TaskSpec::with_defaults(TaskId::BimodalFit);
        let g = vec![0.4, -0.3, 0.2, 0.1, 0.0, 0.9, -0.5, 0.3];
        let clean = t.arm.fitness(&g).unwrap();
        let e = t.expected_evaluation(&g, 1, StreamSeed::root(0)).unwrap();
        assert_close!(e.fitness, clean - 0.05, 1e-12);
    }

    #[test]
    fn offsets() {
        assert_close!(
            TaskSpec::with_defaults(TaskId::GaussFit).qd_offset(),
            core::f64::consts::PI * core::f64::consts::PI,
            1e-12
        );
        assert_eq!(TaskSpec::with_defaults(TaskId::TwoSigmaDesc).qd_offset(), 1.0);
    }
}
