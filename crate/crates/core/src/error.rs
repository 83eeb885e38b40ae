use thiserror::Error;

/// Errors raised by the numerical pipeline and the file/config layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A point or geodesic left the ball on which a chart is valid.
    #[error("point {point:?} lies outside the chart ball of radius {radius}")]
    OutsideChart { point: [f64; 3], radius: f64 },

    /// An iterative solver failed to reach its tolerance.
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Geometry degenerated at a grid node (non-positive radius, singular metric, ...).
    #[error("degenerate geometry at node {node}: {reason}")]
    Degenerate { node: usize, reason: String },

    /// No nondegenerate critical point of the scalar curvature was found.
    #[error("no critical point of the scalar curvature found: {0}")]
    NoCriticalPoint(String),

    /// Invalid parameters or configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("too few usable levels for a rate fit: have {have}, need {need}")]
    InsufficientLevels { have: usize, need: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error at {path}: {message}")]
    Json { path: String, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Exit code used by the command line driver: 2 for configuration and
    /// I/O problems, 1 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Json { .. } | Error::Csv(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn outside(point: &nalgebra::Vector3<f64>, radius: f64) -> Self {
        Error::OutsideChart {
            point: [point.x, point.y, point.z],
            radius,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
