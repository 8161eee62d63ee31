use thiserror::Error;

/// Errors raised by mesh construction, kernel evaluation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid aperture: {0}")]
    InvalidAperture(String),
    #[error("invalid mesh parameter: {0}")]
    InvalidMeshSize(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unsupported quadrature order {0}")]
    UnsupportedOrder(usize),
    #[error("singular evaluation: {0}")]
    Singular(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solver failure: {message} (condition estimate {condition:e})")]
    Solver { message: String, condition: f64 },
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

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
