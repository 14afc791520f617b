//! Quantitative model of the matter-radiation entropy gap in an expanding
//! universe.
//!
//! The library evaluates the entropy gap ΔS(t) of a radiation-dominated
//! homogeneous model across some forty orders of magnitude in time, solves
//! for the two critical times where the expansion and nuclear-burning rates
//! balance, and verifies the perturbative entropy expansion against exact
//! finite-dimensional computations on discrete spectral states.
//!
//! Conventions used throughout:
//!
//! * energies are temperatures in Kelvin (Boltzmann constant set to 1),
//! * times are years,
//! * gap magnitudes are carried as natural logs plus a sign, because the
//!   raw values overflow any fixed-width float at realistic parameters.
//!
//! Modules map onto the model's parts: [`quantities`] owns parameters and
//! their dimensionless reduction, [`gap_model`] the closed-form evolution,
//! [`critical_times`] the exact and asymptotic roots of the balance
//! equation, [`spectral_oracle`] the exact finite-dimensional checks, and
//! [`check`] an executable invariant suite.

pub mod check;
pub mod critical_times;
pub mod gap_model;
pub mod quantities;
pub mod sampling;
pub mod spectral_oracle;

pub use quantities::{DimensionlessParams, ModelParams, ParamError, ParamOverrides};
