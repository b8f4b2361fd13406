//! Spectral propagators on spheres for band-limited zonal data.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Gegenbauer recurrences, zonal harmonics and their
//!   large-degree modulated-cosine asymptotic.
//! * [`arith`]: representation counts, quadratic Gauss sums and the
//!   frequency gaps behind the Riesz-sequence argument.
//! * [`spectral`]: zonal and circle fields, spectral multipliers and the
//!   Schrödinger / half-wave propagators.
//! * [`quadrature`]: Gauss–Gegenbauer rules, exact space-time `L^p` norms,
//!   certified maximal functions and log-log exponent fits.
//! * [`experiments`]: scenario drivers producing [`experiments::ScalingRun`]
//!   records with pass / fail / inconclusive verdicts.

// Argument checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod error;
pub mod experiments;
pub mod quadrature;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
