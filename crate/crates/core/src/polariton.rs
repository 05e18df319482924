//! Dark-state polariton model: photonic/atomic mixing, rotation of the
//! stored hyperfine coherences in a magnetic field, and the retrieval
//! efficiency that follows from them.
//!
//! The retrieval efficiency after storage time `T` is
//!
//! ```text
//! η(T) = | Σ_{m1,m2} R_{m1} R_{m2} / Σ_m R_m²  ·  D^(b)†_{m2 m1}(T) D^(a)_{m1 m2}(T) |²
//! ```
//!
//! with `D^(s)(T) = exp(-i g_s (Ω·F) T)`. The index placement is kept exactly
//! as written; [`evolve_coherences`] gives an independent route to the same
//! number through the full coherence matrix.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::angmom::{build_spin_operators, AngMomError, CMatrix, RotationMatrix, Rotor};
use crate::cg::{rational_to_f64, CgError, DarkStateWeights};
use crate::fields::{ensemble_fields, larmor_period, omega_vector, FieldConfig, FieldError, LevelConstants};
use crate::qn::HalfInt;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolaritonError {
    #[error(transparent)]
    Cg(#[from] CgError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    AngMom(#[from] AngMomError),
    #[error("coherence matrix is {rows}x{cols}, expected {exp_rows}x{exp_cols}")]
    DimensionMismatch { rows: usize, cols: usize, exp_rows: usize, exp_cols: usize },
    #[error("time grid must be finite and strictly increasing")]
    NonMonotoneGrid,
    #[error("control Rabi frequency and atomic coupling are both zero")]
    NoCoupling,
    #[error("number of atoms must be at least 1, got {0}")]
    NoAtoms(f64),
}

/// The three hyperfine levels plus their Landé factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineSpec {
    pub f_a: HalfInt,
    pub f_b: HalfInt,
    pub f_c: HalfInt,
    pub consts: LevelConstants,
}

impl Default for HyperfineSpec {
    /// ⁸⁵Rb D1 line: `F_a = 3`, `F_b = 2` ground levels, `F_c = 3` in 5P₁/₂.
    fn default() -> Self {
        HyperfineSpec { f_a: HalfInt::from_int(3), f_b: HalfInt::from_int(2), f_c: HalfInt::from_int(3), consts: LevelConstants::default() }
    }
}

#[derive(Debug, Clone)]
pub struct PolaritonConfig {
    pub weights: DarkStateWeights,
    pub n_atoms: f64,
    pub coupling_g: Complex64,
    pub control_rabi: Complex64,
}

/// `(photonic, atomic)` fractions of the dark-state polariton:
/// `|Ω|² / (|Ω|² + N p |g|² Σ R²)` and its complement.
pub fn mixing_fractions(cfg: &PolaritonConfig) -> Result<(f64, f64), PolaritonError> {
    cfg.weights.require_connected()?;
    if cfg.n_atoms.is_nan() || cfg.n_atoms < 1.0 {
        return Err(PolaritonError::NoAtoms(cfg.n_atoms));
    }
    let p = cfg.weights.population_per_sublevel();
    let sum_r2 = rational_to_f64(&cfg.weights.sum_r_squared());
    let photonic = cfg.control_rabi.norm_sqr();
    let atomic = cfg.n_atoms * p * cfg.coupling_g.norm_sqr() * sum_r2;
    let total = photonic + atomic;
    if total == 0.0 {
        return Err(PolaritonError::NoCoupling);
    }
    Ok((photonic / total, atomic / total))
}

/// Amplitudes `<S^{b m_b}_{a m_a}>` of one stored spin-wave mode.
///
/// Rows run over `m_b = -F_b..F_b`, columns over `m_a = -F_a..F_a`, both
/// ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    pub f_b: HalfInt,
    pub f_a: HalfInt,
    pub amplitudes: CMatrix,
}

impl CoherenceMatrix {
    pub fn zeros(f_b: HalfInt, f_a: HalfInt) -> Self {
        CoherenceMatrix { f_b, f_a, amplitudes: CMatrix::zeros(f_b.multiplicity(), f_a.multiplicity()) }
    }

    /// The stored dark-state spin wave: diagonal entries `R_m / sqrt(Σ R²)`.
    pub fn dark_state(weights: &DarkStateWeights) -> Result<Self, PolaritonError> {
        weights.require_connected()?;
        let norm = rational_to_f64(&weights.sum_r_squared()).sqrt();
        let mut c = Self::zeros(weights.f_b, weights.f_a);
        for (m, r) in weights.ratios() {
            c.set(m, m, Complex64::from(r / norm));
        }
        Ok(c)
    }

    pub fn get(&self, m_b: HalfInt, m_a: HalfInt) -> Complex64 {
        match (self.f_b.index_of(m_b), self.f_a.index_of(m_a)) {
            (Some(r), Some(c)) => self.amplitudes[(r, c)],
            _ => Complex64::from(0.0),
        }
    }

    pub fn set(&mut self, m_b: HalfInt, m_a: HalfInt, value: Complex64) {
        let r = self.f_b.index_of(m_b).expect("m_b outside level b");
        let c = self.f_a.index_of(m_a).expect("m_a outside level a");
        self.amplitudes[(r, c)] = value;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_shape(&self) -> Result<(), PolaritonError> {
        let (rows, cols) = self.amplitudes.shape();
        let (exp_rows, exp_cols) = (self.f_b.multiplicity(), self.f_a.multiplicity());
        if rows != exp_rows || cols != exp_cols {
            return Err(PolaritonError::DimensionMismatch { rows, cols, exp_rows, exp_cols });
        }
        Ok(())
    }
}

/// Spectral decompositions for both ground levels in one field.
#[derive(Debug, Clone)]
pub struct LevelRotors {
    pub rotor_a: Rotor,
    pub rotor_b: Rotor,
    pub consts: LevelConstants,
}

impl LevelRotors {
    pub fn new(f_a: HalfInt, f_b: HalfInt, omega: &Vector3<f64>, consts: &LevelConstants) -> Result<Self, PolaritonError> {
        let ops_a = build_spin_operators(f_a)?;
        let ops_b = build_spin_operators(f_b)?;
        Ok(LevelRotors { rotor_a: Rotor::new(&ops_a, omega), rotor_b: Rotor::new(&ops_b, omega), consts: *consts })
    }

    pub fn for_field(f_a: HalfInt, f_b: HalfInt, field: &FieldConfig, consts: &LevelConstants) -> Result<Self, PolaritonError> {
        Self::new(f_a, f_b, &omega_vector(field, consts), consts)
    }

    /// `(D^(a)(t), D^(b)(t))`.
    pub fn at(&self, t: f64) -> (RotationMatrix, RotationMatrix) {
        (self.rotor_a.at(self.consts.g_a, t), self.rotor_b.at(self.consts.g_b, t))
    }
}

/// Rotates every hyperfine coherence for time `t`:
/// `S^{b m}_{a m'}(t) = Σ_{m1,m2} D^(b)†_{m1 m} D^(a)_{m' m2} S^{b m1}_{a m2}(0)`,
/// i.e. `conj(D^(b)) · S · D^(a)ᵀ`.
pub fn evolve_coherences(
    c0: &CoherenceMatrix,
    field: &FieldConfig,
    consts: &LevelConstants,
    t: f64,
) -> Result<CoherenceMatrix, PolaritonError> {
    c0.check_shape()?;
    let rotors = LevelRotors::for_field(c0.f_a, c0.f_b, field, consts)?;
    Ok(evolve_with(c0, &rotors, t))
}

pub fn evolve_with(c0: &CoherenceMatrix, rotors: &LevelRotors, t: f64) -> CoherenceMatrix {
    let (d_a, d_b) = rotors.at(t);
    let amplitudes = d_b.elements.conjugate() * &c0.amplitudes * d_a.elements.transpose();
    CoherenceMatrix { f_b: c0.f_b, f_a: c0.f_a, amplitudes }
}

/// Weights reduced to index form for the inner loop.
#[derive(Debug, Clone)]
struct IndexedRatios {
    // (index in level a, index in level b, R_m / sqrt(Σ R²))
    rows: Vec<(usize, usize, f64)>,
}

impl IndexedRatios {
    fn new(weights: &DarkStateWeights) -> Result<Self, PolaritonError> {
        weights.require_connected()?;
        let norm = rational_to_f64(&weights.sum_r_squared()).sqrt();
        let rows = weights
            .ratios()
            .map(|(m, r)| {
                let ia = weights.f_a.index_of(m).expect("connected weights lie inside level a");
                let ib = weights.f_b.index_of(m).expect("weights are indexed by level b");
                (ia, ib, r / norm)
            })
            .collect();
        Ok(IndexedRatios { rows })
    }

    fn eta(&self, d_a: &RotationMatrix, d_b: &RotationMatrix) -> f64 {
        let mut acc = Complex64::from(0.0);
        for &(ia1, ib1, r1) in &self.rows {
            for &(ia2, ib2, r2) in &self.rows {
                // D^(b)†_{m2 m1} = conj(D^(b)_{m1 m2})
                let db_dag = d_b.elements[(ib1, ib2)].conj();
                acc += db_dag * d_a.elements[(ia1, ia2)] * (r1 * r2);
            }
        }
        acc.norm_sqr()
    }
}

/// Retrieval efficiency `⟨N(T)⟩/⟨N(0)⟩` for a uniform field of magnitude
/// `field.b_gauss`. Gradients are handled by [`efficiency_curve`].
pub fn efficiency(
    weights: &DarkStateWeights,
    field: &FieldConfig,
    consts: &LevelConstants,
    t_s: f64,
) -> Result<f64, PolaritonError> {
    let ratios = IndexedRatios::new(weights)?;
    let rotors = LevelRotors::for_field(weights.f_a, weights.f_b, field, consts)?;
    let (d_a, d_b) = rotors.at(t_s);
    Ok(ratios.eta(&d_a, &d_b))
}

/// Sampled retrieval efficiency with the inputs that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve {
    pub times: Vec<f64>,
    pub eta: Vec<f64>,
    pub field: FieldConfig,
    pub consts: LevelConstants,
    pub weight_fingerprint: String,
}

impl EfficiencyCurve {
    /// Builds a curve from raw samples without model metadata (analysis
    /// input, tests).
    pub fn from_samples(times: Vec<f64>, eta: Vec<f64>) -> Self {
        EfficiencyCurve {
            times,
            eta,
            field: FieldConfig { b_gauss: 0.0, ..FieldConfig::default() },
            consts: LevelConstants::default(),
            weight_fingerprint: String::new(),
        }
    }

    /// The analytic Larmor period recorded in the metadata, if defined.
    pub fn larmor_period(&self) -> Option<f64> {
        larmor_period(&self.field, &self.consts).ok()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), PolaritonError> {
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PolaritonError::NonMonotoneGrid);
    }
    Ok(())
}

/// Evaluates the efficiency on a time grid. With a field gradient the result
/// is the ensemble-weighted average of the intensities.
pub fn efficiency_curve(
    weights: &DarkStateWeights,
    field: &FieldConfig,
    consts: &LevelConstants,
    t_grid: &[f64],
) -> Result<EfficiencyCurve, PolaritonError> {
    check_grid(t_grid)?;
    let ratios = IndexedRatios::new(weights)?;
    let members: Vec<(LevelRotors, f64)> = ensemble_fields(field)?
        .into_iter()
        .map(|(b, w)| LevelRotors::for_field(weights.f_a, weights.f_b, &field.with_b(b), consts).map(|r| (r, w)))
        .collect::<Result<_, _>>()?;

    let eta: Vec<f64> = t_grid
        .par_iter()
        .map(|&t| {
            members
                .iter()
                .map(|(rotors, w)| {
                    let (d_a, d_b) = rotors.at(t);
                    w * ratios.eta(&d_a, &d_b)
                })
                .sum()
        })
        .collect();

    Ok(EfficiencyCurve {
        times: t_grid.to_vec(),
        eta,
        field: *field,
        consts: *consts,
        weight_fingerprint: weights.fingerprint(),
    })
}

/// One curve per orientation; `template` supplies the magnitude, azimuth
/// and gradient settings, and `theta` is overridden per curve.
pub fn theta_sweep(
    weights: &DarkStateWeights,
    template: &FieldConfig,
    consts: &LevelConstants,
    thetas: &[f64],
    t_grid: &[f64],
) -> Result<Vec<EfficiencyCurve>, PolaritonError> {
    thetas
        .iter()
        .map(|&theta| {
            let field = FieldConfig { theta, ..*template };
            field.validate()?;
            efficiency_curve(weights, &field, consts, t_grid)
        })
        .collect()
}

/// Uniform grid `start, start + step, ...` up to and including `stop`
/// (within a hair of rounding).
pub fn time_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}
