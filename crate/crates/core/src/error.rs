//! Shared error type for the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions are inconsistent for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// (iωI - A) is singular: the evaluation frequency coincides with a pole.
    #[error("frequency {omega} rad/s coincides with a pole of the model")]
    PoleAtFrequency { omega: f64 },

    /// The static interconnection has no solvable algebraic loop.
    #[error("ill-posed interconnection: I - K11*Db is singular")]
    IllPosed,

    /// The interconnection loop is singular at a specific frequency.
    #[error("interconnection is ill-posed at frequency {omega} rad/s")]
    IllPosedAt { omega: f64 },

    /// An operation that requires asymptotic stability got an unstable model.
    #[error("model is not stable: spectral abscissa {abscissa:.6e} >= 0")]
    Unstable { abscissa: f64 },

    /// An iterative linear-algebra kernel failed to converge or lost rank.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Requirement translation is infeasible at the listed grid frequencies.
    #[error("requirement translation infeasible at {} grid frequencies (first: {} rad/s)",
            .omegas.len(), .omegas.first().copied().unwrap_or(f64::NAN))]
    Infeasible { omegas: Vec<f64> },

    /// No reduced order up to the model order satisfies the requirement.
    #[error("requirement unattainable: no order <= {max_order} passes every grid point")]
    Unattainable { max_order: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed CSV or other textual input.
    #[error("parse error: {0}")]
    Parse(String),
}
