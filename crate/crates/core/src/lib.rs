//! Classical and quantum mechanics of a free particle on the SU(2) group
//! manifold (the three-sphere of radius `R`), with numerical verification
//! suites for every identity the construction relies on.
//!
//! Module map:
//!
//! * [`geometry`]: chart and chart-free geometry of S³ (metric, canonical
//!   1-forms, invariant vector fields, Killing residuals).
//! * [`classical`]: Lagrangian and Hamiltonian dynamics, closed-form and
//!   integrated geodesics, Hamilton–Jacobi map, Poisson brackets.
//! * [`sigma_group`]: the centrally extended 7+1 parameter group, its
//!   invariant fields, quantization form and Noether invariants.
//! * [`specfun`]: Gegenbauer polynomials, associated Legendre functions,
//!   spherical harmonics and Gauss–Legendre rules.
//! * [`quadrature`]: tensor-product quadrature on S³ against the Haar measure.
//! * [`quantum`]: polarized wavefunctions, operators, eigenbasis, spectra
//!   and the large-radius contraction study.
//!
//! Parallel loops go through [`par`]; disable the default `parallel`
//! feature for a purely sequential build.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod classical;
pub mod diff;
pub mod error;
pub mod geometry;
pub mod par;
pub mod poly;
pub mod quadrature;
pub mod quantum;
pub mod sampling;
pub mod sigma_group;
pub mod specfun;
pub mod tolerances;

pub use error::{Error, Result};
pub use geometry::{ChartCoords, S3Point, Side, SpaceConfig};

/// Complex scalar used for wavefunction values and group phases.
pub type C64 = num_complex::Complex64;

/// Version string embedded in every verification report.
pub const SUITE_VERSION: &str = concat!("su2sigma-", env!("CARGO_PKG_VERSION"));
