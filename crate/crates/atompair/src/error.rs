//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the physics and I/O layers.
///
/// Numerical failures carry enough context to diagnose which guard fired;
/// the CLI maps `Config`/`Io` to exit code 2 and everything else to 3.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimensionless distance was below the short-range cutoff where the
    /// coherent coupling diverges.
    #[error("distance x = {x:.6e} below cutoff x_min = {x_min:.6e}")]
    DistanceBelowCutoff { x: f64, x_min: f64 },

    /// Adaptive quadrature hit the order cap before successive refinements
    /// agreed to the requested tolerance.
    #[error("quadrature not converged at order cap {order}: last delta {err:.3e} > tol {tol:.3e}")]
    QuadratureNotConverged { order: usize, err: f64, tol: f64 },

    /// Too much packet probability mass sits below the short-range cutoff for
    /// the coherent moments to be meaningful.
    #[error("packet mass below short-range cutoff is {mass:.3e} (limit {limit:.3e})")]
    ExcessiveCutoffMass { mass: f64, limit: f64 },

    /// A reconstructed density matrix violated positivity beyond tolerance.
    #[error("positivity violated: |z|^2 exceeds p_plus*p_minus by {excess:.3e}")]
    PositivityViolation { excess: f64 },

    /// The mean coupling is too close to zero for the single-time
    /// disentanglement formula.
    #[error("mean dissipative coupling mu_bar = {mu_bar:.3e} is degenerate")]
    DegenerateMuBar { mu_bar: f64 },

    /// A state or matrix failed validation (normalization, Hermiticity, ...).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A run configuration failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem or serialization failure in the CLI layer.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
