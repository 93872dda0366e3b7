//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation point outside the permitted annulus of the exterior map.
    #[error("point with |w| = {modulus:.6e} is below the permitted annulus |w| >= {min_modulus:.6e}")]
    OutsideDomain { modulus: f64, min_modulus: f64 },

    /// The map derivative vanishes where it must not.
    #[error("degenerate map: |Psi'| = {deriv_abs:.3e} at theta = {theta:.6}")]
    DegenerateMap { theta: f64, deriv_abs: f64 },

    /// Boundary curve self-intersects at the sampling resolution.
    #[error("boundary curve is not simple: segments {i} and {j} intersect at {samples} samples")]
    NotSimpleCurve { i: usize, j: usize, samples: usize },

    #[error("invalid conformal map: {0}")]
    BadMap(String),

    #[error("unknown shape `{0}`")]
    UnknownShape(String),

    /// Grunsky construction: dropped coefficients exceed the requested bound.
    #[error(
        "insufficient truncation: grunsky tail {tail:.3e} exceeds {tol:.1e} of leading entry {leading:.3e}; increase the order"
    )]
    InsufficientTruncation { tail: f64, leading: f64, tol: f64 },

    #[error("too few samples for order {order}: need at least {needed}, got {got}")]
    AliasedSamples { order: usize, needed: usize, got: usize },

    #[error("samples must be uniformly spaced in theta")]
    NonUniformSamples,

    #[error("assembly failed: {what} is singular (condition estimate {cond:.3e})")]
    SingularSystem { what: &'static str, cond: f64 },

    #[error("dimension mismatch: {what} ({got} vs {expected})")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("empty point set for {0}")]
    EmptyPointSet(&'static str),

    /// A loss term or objective stopped being finite.
    #[error("non-finite value in {context}: {value}")]
    NonFinite { context: String, value: f64 },

    #[error("training diverged at iteration {iter}: loss {loss:.3e} exceeds {limit:.3e}")]
    Diverged { iter: usize, loss: f64, limit: f64 },

    #[error("offset delta = {delta:.3e} leaves the inclusion at theta = {theta:.6}")]
    OffsetTooLarge { delta: f64, theta: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::UnknownShape(_) | Error::Io(_) | Error::Json(_)
        )
    }
}
