use thiserror::Error;

use crate::fock::{Kind, Sheaf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("weight {weight} is below the minimal weight {min} of {kind:?} in {sheaf:?}")]
    OutOfRangeWeight {
        sheaf: Sheaf,
        kind: Kind,
        weight: i64,
        min: i64,
    },
    #[error("coordinate {coord} is outside 1..={dim}")]
    BadCoordinate { coord: usize, dim: usize },
    #[error("sheaf or dimension mismatch: {0}")]
    SheafMismatch(String),
    #[error("slice basis exceeds the cap of {cap} monomials")]
    SliceOverflow { cap: usize },
    #[error("operator output leaves the inferred codomain slice: {0}")]
    GradingMismatch(String),
    #[error("invalid Poisson structure: {0}")]
    InvalidPoisson(String),
    #[error("no one-form alpha with pi(alpha) equal to the Euler field")]
    NoHamiltonianWitness,
    #[error("state is not homogeneous: {0}")]
    Inhomogeneous(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
