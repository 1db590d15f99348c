//! Phase diagram and critical behaviour of a generalized Dicke model: two
//! interacting spin ensembles sharing one bosonic mode,
//!
//! ```text
//! H = Ω (J1z + J2z) + (χ/J) J1x J2x + ω b†b + (λ/√J)(J1x + J2x)(b† + b)
//! ```
//!
//! The crate is layered bottom-up:
//!
//! * [`model`] holds the couplings, the mean-field energy functional and the
//!   analytic phase boundaries.
//! * [`solver`] finds the global mean-field minimum numerically.
//! * [`gaussian`] expands around that minimum to quadratic order and
//!   diagonalizes the resulting three coupled oscillators symplectically.
//! * [`ed`] exactly diagonalizes the finite-J Hamiltonian and serves as an
//!   independent oracle.
//! * [`sweep`] drives parameter grids, critical-point location and power-law
//!   fits for the `gdicke` command line tool.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ed;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use gaussian::{
    build_quadratic, covariance_observables, energy_gap, entanglement_entropy, williamson, Fluctuations,
    GaussianSpectrum, QuadraticCoefficients,
};
pub use model::{
    analytic_branches, classify_phase, mean_field_energy, mean_field_gradient, order_parameters,
    MeanFieldConfiguration, ModelParams, OrderParameters, Phase, PhaseLabel,
};
pub use solver::{energy_derivatives_chi, minimize, MeanFieldSolution, SolverOptions};
