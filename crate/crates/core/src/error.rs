use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::sparse::SolveError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point ({0}, {1}) lies outside the reference triangle")]
    OutsideReference(f64, f64),

    #[error("unsupported quadrature degree {0} (supported: 1..=6)")]
    UnsupportedDegree(usize),

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("function evaluation failed at ({x}, {y}): {source}")]
    Evaluation {
        x: f64,
        y: f64,
        #[source]
        source: EvalError,
    },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid problem data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("at eps = {eps:e}: {source}")]
    AtEps {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Solve(#[from] SolveError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_eps(eps: f64) -> impl FnOnce(Error) -> Error {
        move |e| Error::AtEps {
            eps,
            source: Box::new(e),
        }
    }
}
