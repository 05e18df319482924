//! Dark-state polariton storage in a Zeeman-degenerate atomic memory.
//!
//! * [`angmom`]: spin operators and field-driven rotation matrices.
//! * [`cg`]: exact Clebsch–Gordan coefficients and dark-state weights.
//! * [`fields`]: magnetic field configuration, Larmor periods, gradient ensembles.
//! * [`polariton`]: mixing fractions, coherence evolution and retrieval efficiency.
//! * [`revivals`]: revival times and collapse widths of efficiency curves.
//! * [`photostats`]: Monte Carlo photon counting and correlation statistics.
//!
//! Magnetic sublevels are always ordered `m = -F, -F+1, …, +F`; row or
//! column `k` of any matrix corresponds to `m = -F + k`.

pub mod angmom;
pub mod cg;
pub mod fields;
pub mod photostats;
pub mod polariton;
pub mod qn;
pub mod revivals;

use thiserror::Error;

pub use angmom::{build_spin_operators, compose_check, rotation_matrix, CMatrix, RotationMatrix, Rotor, SpinOperators};
pub use cg::{clebsch_gordan, dark_state_weights, partial_revival_amplitude, DarkStateWeights, ExactCg};
pub use fields::{ensemble_fields, larmor_period, omega_vector, FieldConfig, GradientModel, LevelConstants};
pub use photostats::{
    alpha, cauchy_schwarz_check, g_si, run_trials, CoincidenceTally, DetectionModel, Estimate, SourceMode, SourceModel,
};
pub use polariton::{
    efficiency, efficiency_curve, evolve_coherences, mixing_fractions, theta_sweep, CoherenceMatrix, EfficiencyCurve,
    HyperfineSpec, PolaritonConfig,
};
pub use qn::HalfInt;
pub use revivals::{collapse_revival_scaling, find_revivals, RevivalReport, WidthDefinition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Qn(#[from] qn::QnError),
    #[error(transparent)]
    AngMom(#[from] angmom::AngMomError),
    #[error(transparent)]
    Cg(#[from] cg::CgError),
    #[error(transparent)]
    Field(#[from] fields::FieldError),
    #[error(transparent)]
    Polariton(#[from] polariton::PolaritonError),
    #[error(transparent)]
    Revival(#[from] revivals::RevivalError),
    #[error(transparent)]
    Stats(#[from] photostats::StatsError),
}
