use thiserror::Error;

/// Errors raised by the cross-dimensional algebra and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A dimension or element count does not fit in `usize`.
    #[error("dimension overflow while computing {0}")]
    Overflow(&'static str),

    #[error("empty {0}: dimensions must be positive")]
    Empty(&'static str),

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("parameter {name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("dimension {dim} is not invariant under the action (maps to {image})")]
    NotInvariant { dim: usize, image: usize },

    #[error("no lift to dimension {target}: admissible dimensions are multiples of {base}")]
    NoLift { target: usize, base: usize },

    #[error("target {0}")]
    InvalidTarget(String),

    #[error("transience not realizable: steering residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotRealizable { residual: f64, tol: f64 },

    #[error("phase boundary mismatch at t = {time}: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    PhaseMismatch { time: f64, deviation: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
