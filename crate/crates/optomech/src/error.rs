use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of a function or model.
    #[error("domain error: {0}")]
    Domain(String),
    /// Scenario or parameter validation failure.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Iterative solver did not converge.
    #[error("solver failure: {0}")]
    Solver(String),
    /// Mechanical instability (softening past the buckling threshold).
    #[error("instability: {0}")]
    Instability(String),
    /// Linear algebra breakdown or degenerate steady state.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Whether the error comes from bad input rather than from numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
