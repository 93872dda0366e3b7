//! Core library for designing approximately neutral inclusions.
//!
//! An inclusion with conductivity `sigma_c` sits in a matrix of conductivity
//! `sigma_m`. Across its boundary the flux jump is controlled by a
//! position-dependent interface function; chosen well, it suppresses the
//! perturbation the inclusion induces in a uniform background field, making
//! the inclusion nearly invisible to far-field probes.
//!
//! The crate provides two routes to such interface functions:
//!
//! * a series solver on exterior conformal maps (Faber polynomials, Grunsky
//!   coefficients, and a truncated linear system for the scattering
//!   amplitudes), used both as a forward solver and inside a direct designer;
//! * a physics-informed training loop that fits two small networks for the
//!   interior/exterior potentials and, in the "concurrent" variant, learns
//!   the interface function's Fourier coefficients alongside them.

pub mod analytic;
pub mod colloc;
pub mod designer;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod nn;
pub mod par;
pub mod training;

pub use error::{Error, Result};
