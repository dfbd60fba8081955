//! Numerical workbench for weighted Bergman spaces `A^p_α` on the unit disk.
//!
//! The crate evaluates norms, boundary test kernels and weighted composition
//! operator families `S_t = u_t C_{φ_t}`, and verifies at desk scale the
//! interchange identity between the essential norm of the integrated family
//! `∫₀¹ S_t dt` and the integral of the per-operator essential norms.
//!
//! Modules:
//! - [`quadrature`]: adaptive interval and unit-disk integration, including
//!   double-exponential endpoint handling and boundary-graded disk rules.
//! - [`special`]: log-gamma, Beta and the independent series oracle for
//!   power-kernel norms.
//! - [`bergman`]: Bergman norms and the three boundary test-kernel families.
//! - [`operators`]: weighted composition symbols, built-in families and a
//!   small expression DSL for user-defined symbols.
//! - [`essnorm`]: the essential-norm formulas, kernel-limit curves,
//!   extrapolation and equality verdicts.
//! - [`admissibility`]: sampled verification of the direction conditions and
//!   the integrability/continuity condition.

// Validation sites use `!(x < y)` so that NaN fails closed.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod bergman;
pub mod essnorm;
pub mod operators;
pub mod quadrature;
pub mod special;

pub use quadrature::{integrate_disk, integrate_interval, IntegrationResult, QuadratureSpec};
pub use special::SpaceParams;

use thiserror::Error;

/// Errors shared across the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integrand evaluated to a non-finite value at z = {0}")]
    NonFiniteSample(num_complex::Complex64),
    #[error("quadrature did not converge: {0}")]
    NotConverged(String),
    #[error("symbol is not a self-map of the disk: |phi({z})| = {modulus} >= 1")]
    NotSelfMap {
        z: num_complex::Complex64,
        modulus: f64,
    },
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
