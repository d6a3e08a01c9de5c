use thiserror::Error;

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("boundary singularity: {0}")]
    Singularity(String),

    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),

    #[error("not hyperbolic along line: root {re} + {im}i has imaginary residue above tolerance")]
    NotHyperbolic { re: f64, im: f64 },

    #[error("indefinite Hessian: {0}")]
    Indefinite(String),

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("step failure at iteration {iteration}: {reason}")]
    StepFailure { iteration: usize, reason: String },

    #[error("invalid initial point: {0}")]
    Initialization(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
