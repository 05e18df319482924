//! Angular-momentum operators and the rotation matrices generated by a
//! static magnetic field.
//!
//! All matrices use the ascending basis `m = -F, -F+1, ..., +F`; row and
//! column `k` correspond to `m = -F + k`. See [`HalfInt::index_of`].
//!
//! Rotations are computed as `exp(-i g (Ω·F) t)` through the spectral
//! decomposition of the unit-direction generator `n·F`, whose eigenvalues
//! are exactly the projections `m`. The numerically obtained eigenvalues are
//! snapped onto that lattice so the eigenphases are `g |Ω| m t` to roundoff,
//! which keeps revivals phase-coherent over many Larmor periods.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use thiserror::Error;

use crate::qn::HalfInt;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngMomError {
    #[error("angular momentum must be non-negative, got {0}")]
    Negative(HalfInt),
    #[error("rotation matrices act on different levels ({0} vs {1})")]
    DimensionMismatch(HalfInt, HalfInt),
}

/// `F_x`, `F_y`, `F_z` for a single level of angular momentum `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub f: HalfInt,
    pub fx: CMatrix,
    pub fy: CMatrix,
    pub fz: CMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.f.multiplicity()
    }

    /// `F_+`, with `<m+1|F_+|m> = sqrt(F(F+1) - m(m+1))`.
    pub fn raising(&self) -> CMatrix {
        &self.fx + &self.fy * Complex64::i()
    }

    pub fn lowering(&self) -> CMatrix {
        &self.fx - &self.fy * Complex64::i()
    }

    /// `n·F` for an arbitrary (not necessarily unit) vector `n`.
    pub fn project(&self, n: &Vector3<f64>) -> CMatrix {
        &self.fx * Complex64::from(n[0]) + &self.fy * Complex64::from(n[1]) + &self.fz * Complex64::from(n[2])
    }

    pub fn casimir(&self) -> CMatrix {
        &self.fx * &self.fx + &self.fy * &self.fy + &self.fz * &self.fz
    }
}

/// Builds the spin matrices for level `f` from the ladder operators.
pub fn build_spin_operators(f: HalfInt) -> Result<SpinOperators, AngMomError> {
    if f.twice() < 0 {
        return Err(AngMomError::Negative(f));
    }
    let n = f.multiplicity();
    let ff = f.value();
    let ms: Vec<f64> = f.projections().map(HalfInt::value).collect();

    let mut raise = CMatrix::zeros(n, n);
    for (k, &m) in ms.iter().enumerate().take(n.saturating_sub(1)) {
        raise[(k + 1, k)] = Complex64::from((ff * (ff + 1.0) - m * (m + 1.0)).sqrt());
    }
    let lower = raise.adjoint();
    let half = Complex64::from(0.5);
    let fx = (&raise + &lower) * half;
    let fy = (&raise - &lower) * Complex64::new(0.0, -0.5);
    let fz = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, ms.iter().map(|&m| Complex64::from(m))));

    Ok(SpinOperators { f, fx, fy, fz })
}

/// Convenience wrapper for float input such as `1.5`.
pub fn spin_operators_f64(f: f64) -> Result<SpinOperators, crate::Error> {
    let f = HalfInt::from_f64(f)?;
    Ok(build_spin_operators(f)?)
}

/// A unitary `D(t) = exp(-i g (Ω·F) t)` on one hyperfine level.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    pub f: HalfInt,
    pub elements: CMatrix,
    /// Dimensionless rotation angle `g |Ω| t`.
    pub generator_time: f64,
}

impl RotationMatrix {
    pub fn identity(f: HalfInt) -> Self {
        let n = f.multiplicity();
        RotationMatrix { f, elements: CMatrix::identity(n, n), generator_time: 0.0 }
    }

    /// Element `<m|D|m'>`, addressed by projections rather than indices.
    pub fn element(&self, m: HalfInt, m_prime: HalfInt) -> Option<Complex64> {
        let r = self.f.index_of(m)?;
        let c = self.f.index_of(m_prime)?;
        Some(self.elements[(r, c)])
    }

    pub fn adjoint(&self) -> RotationMatrix {
        RotationMatrix { f: self.f, elements: self.elements.adjoint(), generator_time: -self.generator_time }
    }

    /// `max |D D† - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.elements.nrows();
        max_abs_diff(&(&self.elements * self.elements.adjoint()), &CMatrix::identity(n, n))
    }
}

/// Precomputed spectral decomposition of `n·F` for one field direction.
///
/// Evaluating [`Rotor::at`] for many times reuses the eigenvectors, which is
/// what the efficiency curves do.
#[derive(Debug, Clone)]
pub struct Rotor {
    f: HalfInt,
    eigvecs: CMatrix,
    eigenvalues: Vec<f64>,
    omega_norm: f64,
}

impl Rotor {
    pub fn new(ops: &SpinOperators, omega_vec: &Vector3<f64>) -> Self {
        let n = ops.dim();
        let omega_norm = omega_vec.norm();
        if omega_norm == 0.0 || n == 1 {
            return Rotor {
                f: ops.f,
                eigvecs: CMatrix::identity(n, n),
                eigenvalues: ops.f.projections().map(HalfInt::value).collect(),
                omega_norm,
            };
        }
        let generator = ops.project(&(omega_vec / omega_norm));
        let eig = generator.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut eigvecs = CMatrix::zeros(n, n);
        let mut eigenvalues = Vec::with_capacity(n);
        for (k, (&src, m)) in order.iter().zip(ops.f.projections()).enumerate() {
            eigvecs.set_column(k, &eig.eigenvectors.column(src));
            let raw = eig.eigenvalues[src];
            let exact = m.value();
            // The spectrum of n·F is exactly {m}; anything else means a bad generator.
            debug_assert!((raw - exact).abs() < 1e-8, "eigenvalue {raw} far from {exact}");
            eigenvalues.push(if (raw - exact).abs() < 1e-8 { exact } else { raw });
        }
        Rotor { f: ops.f, eigvecs, eigenvalues, omega_norm }
    }

    pub fn f(&self) -> HalfInt {
        self.f
    }

    pub fn omega_norm(&self) -> f64 {
        self.omega_norm
    }

    /// Eigenvalues of `Ω·F`, ascending.
    pub fn generator_spectrum(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&m| m * self.omega_norm).collect()
    }

    pub fn at(&self, g_factor: f64, t: f64) -> RotationMatrix {
        let angle = g_factor * self.omega_norm * t;
        if angle == 0.0 {
            return RotationMatrix::identity(self.f);
        }
        let n = self.eigvecs.nrows();
        let mut scaled = self.eigvecs.clone();
        for (k, &m) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -angle * m);
            for r in 0..n {
                scaled[(r, k)] *= phase;
            }
        }
        RotationMatrix { f: self.f, elements: scaled * self.eigvecs.adjoint(), generator_time: angle }
    }
}

/// `exp(-i g (Ω·F) t)` for a single time.
pub fn rotation_matrix(ops: &SpinOperators, omega_vec: &Vector3<f64>, g_factor: f64, t: f64) -> RotationMatrix {
    Rotor::new(ops, omega_vec).at(g_factor, t)
}

/// Product `d1 · d2`. For rotations about a common axis with a common
/// g-factor this is `D(t1 + t2)`.
pub fn compose_check(d1: &RotationMatrix, d2: &RotationMatrix) -> Result<RotationMatrix, AngMomError> {
    if d1.f != d2.f {
        return Err(AngMomError::DimensionMismatch(d1.f, d2.f));
    }
    Ok(RotationMatrix {
        f: d1.f,
        elements: &d1.elements * &d2.elements,
        generator_time: d1.generator_time + d2.generator_time,
    })
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
