//! Spectral representation of periodic fields.

pub mod fft;
pub mod field;
pub mod ops;

pub use fft::Fft3;
pub use field::{PhysicalScalar, PhysicalVector, ScalarField, VectorField};
pub use ops::{
    curl, dealias, divergence_residual, gradient, inner, l2_norm, leray_project, nonlinear_term,
    nonlinear_term_into, nonlinear_term_with, pressure_from_velocity, random_solenoidal, sobolev_norm, stokes_power,
    NonlinearForm, NonlinearOptions, NonlinearWorkspace,
};
