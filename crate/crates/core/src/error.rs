use thiserror::Error;

use crate::geometry::Ellipsoid;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    #[error("degenerate ellipsoid: {0}")]
    DegenerateEllipsoid(String),

    #[error("degenerate norm: {0}")]
    DegenerateNorm(String),

    #[error("ellipsoid does not enclose the body (excess factor {excess:.3e})")]
    NotEnclosing { excess: f64 },

    /// The iterative solver ran out of iterations; `best` is the last iterate,
    /// already rescaled so that it encloses every input point.
    #[error("no convergence after {iterations} iterations (gap {gap:.3e})")]
    Convergence {
        iterations: usize,
        gap: f64,
        best: Box<Ellipsoid>,
    },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("section leaves its fiber at vertex {vertex} (residual {residual:.3e})")]
    Section { vertex: String, residual: f64 },

    #[error("anchor is not injective on the fiber over {base}: {first} and {second} both map to {target}")]
    Anchor {
        base: String,
        first: String,
        second: String,
        target: String,
    },

    #[error("enumeration needs {needed} items, above the cap of {cap}")]
    EnumerationCap { needed: u128, cap: u128 },

    #[error("missing or invalid coefficient certificate: {0}")]
    Certificate(String),

    #[error("invalid net: {0}")]
    Net(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
