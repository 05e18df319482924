//! Applied magnetic field and Larmor frequencies.
//!
//! The signal wavevector defines the z axis. `theta` is the polar angle of
//! the field from z and `phi` its azimuth.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Vector3};
use thiserror::Error;

/// Bohr magneton over Planck's constant, MHz per gauss.
pub const MU_B_OVER_H_MHZ_PER_GAUSS: f64 = 1.399_625;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field magnitude must be finite and non-negative, got {0} G")]
    NegativeField(f64),
    #[error("theta must lie in [0, pi], got {0}")]
    ThetaOutOfRange(f64),
    #[error("gradient spread must be finite and non-negative, got {0} G")]
    NegativeSpread(f64),
    #[error("ensemble size must be at least 1")]
    EmptyEnsemble,
    #[error("Larmor period undefined for B = {b} G and g_b = {g_b}")]
    NoPrecession { b: f64, g_b: f64 },
    #[error("unknown gradient model `{0}` (expected none, uniform or gaussian)")]
    UnknownModel(String),
}

/// How the field magnitude is spread across the atomic ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientModel {
    #[default]
    None,
    /// Equally weighted magnitudes spanning `[B - Δ, B + Δ]`.
    UniformInterval,
    /// Gauss–Hermite nodes over `N(B, Δ²)`, with negative magnitudes dropped.
    Gaussian,
}

impl fmt::Display for GradientModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GradientModel::None => "none",
            GradientModel::UniformInterval => "uniform",
            GradientModel::Gaussian => "gaussian",
        })
    }
}

impl FromStr for GradientModel {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "none" => Ok(GradientModel::None),
            "uniform" | "uniform-interval" => Ok(GradientModel::UniformInterval),
            "gaussian" => Ok(GradientModel::Gaussian),
            other => Err(FieldError::UnknownModel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub b_gauss: f64,
    pub theta: f64,
    pub phi: f64,
    pub gradient_spread: f64,
    pub gradient_model: GradientModel,
    pub n_ensemble: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { b_gauss: 0.47, theta: 0.0, phi: 0.0, gradient_spread: 0.0, gradient_model: GradientModel::None, n_ensemble: 1 }
    }
}

impl FieldConfig {
    pub fn uniform(b_gauss: f64, theta: f64) -> Self {
        FieldConfig { b_gauss, theta, ..Default::default() }
    }

    pub fn with_gradient(mut self, model: GradientModel, spread: f64, n_ensemble: usize) -> Self {
        self.gradient_model = model;
        self.gradient_spread = spread;
        self.n_ensemble = n_ensemble;
        self
    }

    pub fn with_b(mut self, b_gauss: f64) -> Self {
        self.b_gauss = b_gauss;
        self
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.b_gauss.is_finite() && self.b_gauss >= 0.0) {
            return Err(FieldError::NegativeField(self.b_gauss));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(FieldError::ThetaOutOfRange(self.theta));
        }
        if !(self.gradient_spread.is_finite() && self.gradient_spread >= 0.0) {
            return Err(FieldError::NegativeSpread(self.gradient_spread));
        }
        if self.n_ensemble == 0 {
            return Err(FieldError::EmptyEnsemble);
        }
        Ok(())
    }

    pub fn is_uniform(&self) -> bool {
        self.gradient_model == GradientModel::None || self.gradient_spread == 0.0
    }

    pub fn direction(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }
}

/// Landé factors of the two ground hyperfine levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelConstants {
    pub g_a: f64,
    pub g_b: f64,
    pub mu_b_over_h: f64,
}

impl Default for LevelConstants {
    /// ⁸⁵Rb 5S₁/₂ with the nuclear moment neglected: `g(F=2) = -1/3`,
    /// `g(F=3) = +1/3`.
    fn default() -> Self {
        LevelConstants { g_a: 1.0 / 3.0, g_b: -1.0 / 3.0, mu_b_over_h: MU_B_OVER_H_MHZ_PER_GAUSS }
    }
}

impl LevelConstants {
    /// Whether `g_a = -g_b` holds, under which revivals at the Larmor period
    /// are exact. Output metadata reports this flag.
    pub fn antisymmetric_g(&self) -> bool {
        (self.g_a + self.g_b).abs() <= 1e-12 * self.g_b.abs().max(self.g_a.abs())
    }
}

/// `Ω = 2π (μ_B/h) B` along the field direction, in rad/s.
pub fn omega_vector(field: &FieldConfig, consts: &LevelConstants) -> Vector3<f64> {
    field.direction() * omega_magnitude(field.b_gauss, consts)
}

pub fn omega_magnitude(b_gauss: f64, consts: &LevelConstants) -> f64 {
    2.0 * PI * consts.mu_b_over_h * 1e6 * b_gauss
}

/// `2π / |g_b Ω|`, in seconds.
pub fn larmor_period(field: &FieldConfig, consts: &LevelConstants) -> Result<f64, FieldError> {
    larmor_period_for(field.b_gauss, consts)
}

pub fn larmor_period_for(b_gauss: f64, consts: &LevelConstants) -> Result<f64, FieldError> {
    if !(b_gauss > 0.0 && b_gauss.is_finite()) || consts.g_b == 0.0 {
        return Err(FieldError::NoPrecession { b: b_gauss, g_b: consts.g_b });
    }
    Ok(1.0 / (consts.g_b.abs() * consts.mu_b_over_h * 1e6 * b_gauss))
}

/// Field magnitudes and probability weights representing the ensemble.
pub fn ensemble_fields(field: &FieldConfig) -> Result<Vec<(f64, f64)>, FieldError> {
    field.validate()?;
    let b = field.b_gauss;
    let spread = field.gradient_spread;
    let n = field.n_ensemble;
    match field.gradient_model {
        GradientModel::None => Ok(vec![(b, 1.0)]),
        GradientModel::UniformInterval => {
            if n == 1 {
                return Ok(vec![(b, 1.0)]);
            }
            let w = 1.0 / n as f64;
            Ok((0..n)
                .map(|k| {
                    let frac = k as f64 / (n - 1) as f64;
                    ((b - spread + 2.0 * spread * frac).max(0.0), w)
                })
                .collect())
        }
        GradientModel::Gaussian => {
            let nodes: Vec<(f64, f64)> = gauss_hermite_probabilists(n)
                .into_iter()
                .map(|(x, w)| (b + spread * x, w))
                .filter(|&(bb, _)| bb >= 0.0)
                .collect();
            let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
            Ok(nodes.into_iter().map(|(bb, w)| (bb, w / total)).collect())
        }
    }
}

/// Nodes and normalised weights of the `n`-point Gauss–Hermite rule for the
/// standard normal density (Golub–Welsch).
pub fn gauss_hermite_probabilists(n: usize) -> Vec<(f64, f64)> {
    if n == 1 {
        return vec![(0.0, 1.0)];
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = jacobi.symmetric_eigen();
    let mut nodes: Vec<(f64, f64)> =
        (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
    for node in &mut nodes {
        node.1 /= total;
    }
    nodes
}
