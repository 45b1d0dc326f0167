//! Transient linear response of a driven two-level system that dephases
//! against a bosonic thermal bath.
//!
//! The induced dipole moment after a sudden switch-on of the drive is
//! computed for two preparations of the total system: joint thermal
//! equilibrium (the correlated initial condition) and a factorized
//! system x bath product state. The difference between the two shows up in
//! rise times, asymptotic amplitudes and phases of the stationary
//! oscillation, and is largest for strong coupling at intermediate
//! temperatures.
//!
//! Units: hbar = k_B = 1, energies and frequencies in units of omega_0,
//! times as t~ = omega_0 t.
//!
//! Module map:
//! * [`quadrature`] - adaptive Gauss-Kronrod and fixed-order composite rules;
//! * [`bath`] - spectral densities, Bose occupation, the dephasing exponent
//!   xi(t), the sine kernel, the polaron shift, and the kernel cache;
//! * [`lineshape`] - the one- and two-time response kernels Psi_1 and Psi_2;
//! * [`response`] - response amplitudes for both initial conditions, trace
//!   assembly and the comparison report.

// Validation comparisons are written negated (`!(x > 0.0)`) so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod error;
pub mod grid;
pub mod lineshape;
pub mod quadrature;
pub mod response;

pub use error::{Error, Result};
pub use grid::TimeGrid;
