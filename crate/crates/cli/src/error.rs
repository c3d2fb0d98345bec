use std::path::Path;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] maxlin::Error),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Csv { path: String, message: String },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn csv(path: &Path, e: csv::Error) -> Self {
        Self::Csv { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        use maxlin::Error as E;
        match self {
            Self::Core(e) => match e {
                E::DimensionMismatch { .. } => "dimension_mismatch",
                E::NonFinite(_) => "non_finite",
                E::InvalidParameter { .. } => "invalid_parameter",
                E::PointOutOfRange(_) => "point_out_of_range",
                E::UnsupportedPoint(_) => "unsupported_point",
                E::UnboundedGenerator => "unbounded_generator",
                E::InvalidGrid(_) => "invalid_grid",
                E::MissingGridPoint(_) => "missing_grid_point",
                E::InvalidObservation { .. } => "invalid_observation",
                E::NegativeGenerator { .. } => "negative_generator",
                E::Unsupported(_) => "unsupported",
                E::OutsideTailRegion { .. } => "outside_tail_region",
                E::NearIndependence(_) => "near_independence",
                E::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
                E::BadGeneratorMean { .. } => "bad_generator_mean",
            },
            Self::Io { .. } => "io",
            Self::Csv { .. } => "csv",
            Self::Config(_) => "config",
            Self::Input(_) => "input",
            Self::Pool(_) => "thread_pool",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 3,
            _ => 2,
        }
    }

    pub fn record(&self, command: &str) -> serde_json::Value {
        json!({
            "schema": crate::config::SCHEMA,
            "command": command,
            "error": { "kind": self.kind(), "message": self.to_string() },
        })
    }
}
