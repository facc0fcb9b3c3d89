use thiserror::Error;

/// Errors raised by the phaselift library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("field mismatch: expected {expected}, found {found}")]
    FieldMismatch {
        expected: crate::Field,
        found: crate::Field,
    },

    #[error("anchor vector must have unit norm (found norm {0})")]
    NonUnitVector(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, allowed {allowed:e})")]
    NotPsd { min_eigenvalue: f64, allowed: f64 },

    #[error("zero-norm draw for sensing vector {index} after resampling")]
    DegenerateDraw { index: usize },

    #[error("cannot rescale noise to a finite SNR against a zero reference power")]
    DegenerateSnr,

    #[error(
        "power iteration did not converge in {iterations} iterations (last bound {last_bound})"
    )]
    PowerIteration { iterations: usize, last_bound: f64 },

    #[error("solver diverged at iteration {iteration}: non-finite objective")]
    Diverged { iteration: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
