//! Noise-free planar redundant arm.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Deref;

use crate::error::{Error, Result};

pub const DEFAULT_JOINTS: usize = 8;

/// Fitness attached to an arm configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMode {
    /// Every configuration scores 0.
    Zero,
    /// Minus the population variance of the joint angles.
    NegJointVariance,
}

/// Joint angles in radians, one per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct Genotype(Vec<f64>);

impl Genotype {
    /// Wraps angles without checking them against an arm.
    pub fn from_vec(angles: Vec<f64>) -> Self {
        Self(angles)
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Genotype {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Normalised end-effector position in `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptor(pub [f64; 2]);

impl Descriptor {
    /// Clamps each component into `[0, 1]`.
    pub fn clamped(p: [f64; 2]) -> Self {
        Self([p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmConfig {
    link_lengths: Vec<f64>,
    angle_bounds: (f64, f64),
    fitness_mode: FitnessMode,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self::uniform(DEFAULT_JOINTS, FitnessMode::NegJointVariance)
            .expect("default arm is valid")
    }
}

impl ArmConfig {
    /// `n_joints` equal links of length `1/n_joints`, angles in `[-π, π]`.
    pub fn uniform(n_joints: usize, fitness_mode: FitnessMode) -> Result<Self> {
        if n_joints < 2 {
            return Err(Error::Config(format!(
                "the arm needs at least 2 joints, got {n_joints}"
            )));
        }
        Self::new(
            vec![1.0 / n_joints as f64; n_joints],
            (-PI, PI),
            fitness_mode,
        )
    }

    pub fn new(
        link_lengths: Vec<f64>,
        angle_bounds: (f64, f64),
        fitness_mode: FitnessMode,
    ) -> Result<Self> {
        if link_lengths.len() < 2 {
            return Err(Error::Config(format!(
                "the arm needs at least 2 joints, got {}",
                link_lengths.len()
            )));
        }
        if link_lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("link lengths must be positive".into()));
        }
        let total: f64 = link_lengths.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "link lengths must sum to 1, got {total}"
            )));
        }
        let (lo, hi) = angle_bounds;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "angle bounds must satisfy min < max, got ({lo}, {hi})"
            )));
        }
        Ok(Self {
            link_lengths,
            angle_bounds,
            fitness_mode,
        })
    }

    pub fn with_fitness_mode(mut self, mode: FitnessMode) -> Self {
        self.fitness_mode = mode;
        self
    }

    pub fn n_joints(&self) -> usize {
        self.link_lengths.len()
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn angle_bounds(&self) -> (f64, f64) {
        self.angle_bounds
    }

    pub fn fitness_mode(&self) -> FitnessMode {
        self.fitness_mode
    }

    /// Largest possible magnitude of a [`FitnessMode::NegJointVariance`]
    /// fitness, `((max - min) / 2)²`.
    pub fn max_variance(&self) -> f64 {
        let half = (self.angle_bounds.1 - self.angle_bounds.0) / 2.0;
        half * half
    }

    /// Checks length and bounds and wraps the angles.
    pub fn genotype(&self, angles: Vec<f64>) -> Result<Genotype> {
        self.check_len(&angles)?;
        let (lo, hi) = self.angle_bounds;
        if let Some((j, a)) = angles
            .iter()
            .enumerate()
            .find(|(_, &a)| !(lo..=hi).contains(&a))
        {
            return Err(Error::Config(format!(
                "joint {j} angle {a} outside [{lo}, {hi}]"
            )));
        }
        Ok(Genotype(angles))
    }

    pub fn check_len(&self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.n_joints() {
            return Err(Error::Dimension {
                expected: self.n_joints(),
                actual: angles.len(),
            });
        }
        Ok(())
    }

    /// End-effector position of the cumulative-angle planar chain.
    ///
    /// Only the length is checked, so perturbed angles outside the bounds are
    /// accepted.
    pub fn forward_kinematics(&self, angles: &[f64]) -> Result<[f64; 2]> {
        self.check_len(angles)?;
        let mut phi = 0.0;
        let (mut x, mut y) = (0.0, 0.0);
        for (&theta, &len) in angles.iter().zip(&self.link_lengths) {
            phi += theta;
            let (s, c) = libm::sincos(phi);
            x += len * c;
            y += len * s;
        }
        Ok([x, y])
    }

    pub fn descriptor(&self, angles: &[f64]) -> Result<Descriptor> {
        self.forward_kinematics(angles).map(normalise)
    }

    pub fn fitness(&self, angles: &[f64]) -> Result<f64> {
        self.check_len(angles)?;
        Ok(match self.fitness_mode {
            FitnessMode::Zero => 0.0,
            FitnessMode::NegJointVariance => -angle_variance(angles),
        })
    }
}

/// Affine map of the reach square `[-1,1]²` onto `[0,1]²`, clamped.
pub fn normalise(p: [f64; 2]) -> Descriptor {
    Descriptor::clamped([(p[0] + 1.0) / 2.0, (p[1] + 1.0) / 2.0])
}

/// Population variance `(1/N) Σ (θ_j - θ̄)²`. Exactly 0 when all angles are
/// equal.
pub fn angle_variance(angles: &[f64]) -> f64 {
    let Some(&pivot) = angles.first() else {
        return 0.0;
    };
    let n = angles.len() as f64;
    let mean = pivot + angles.iter().map(|a| a - pivot).sum::<f64>() / n;
    angles.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n
}
