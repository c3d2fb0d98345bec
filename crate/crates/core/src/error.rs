use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point {0} lies outside [0, 1]")]
    PointOutOfRange(f64),

    #[error("point {0} is not supported by this generator")]
    UnsupportedPoint(f64),

    #[error("generator has no almost-sure path bound; exact simulation is refused")]
    UnboundedGenerator,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid point {0} is missing from the path points")]
    MissingGridPoint(f64),

    #[error("observation {index} = {value} violates the sign constraint for {kind}")]
    InvalidObservation { index: usize, value: f64, kind: &'static str },

    #[error("negative generator value {value} at grid index {index}")]
    NegativeGenerator { index: usize, value: f64 },

    #[error("operation requires {0}")]
    Unsupported(&'static str),

    #[error("arguments ({u}, {v}) lie outside the tail region where the distribution is specified")]
    OutsideTailRegion { u: f64, v: f64 },

    #[error("joint survival {0:e} is too small; the pair norm is numerically the sum norm")]
    NearIndependence(f64),

    #[error("quadrature failed to converge on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },

    #[error("empirical generator column {column} has mean {mean} (standard error {std_error}), expected 1")]
    BadGeneratorMean { column: usize, mean: f64, std_error: f64 },
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
