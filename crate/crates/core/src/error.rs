use thiserror::Error;

/// Errors produced by the analysis, realization and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("network is not weakly reversible")]
    NotWeaklyReversible,

    #[error("no complex balanced equilibrium found: {0}")]
    NoEquilibrium(String),

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("vector a is not orthogonal to the stoichiometric subspace (|a.v| = {0:e})")]
    NotOrthogonal(f64),

    #[error("species sets differ: {0}")]
    SpeciesMismatch(String),

    #[error("reaction counts differ: {candidate} vs {reference}")]
    ReactionCountMismatch { candidate: usize, reference: usize },

    #[error("state positivity lost at t = {time} (species {species}, value {value:e}); try a smaller step")]
    PositivityLost {
        time: f64,
        species: usize,
        value: f64,
    },

    #[error("non-finite value in the vector field at t = {0}")]
    NonFinite(f64),

    #[error("time {t} outside the trajectory domain [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
