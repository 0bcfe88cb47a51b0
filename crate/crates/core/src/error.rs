use thiserror::Error;

/// Errors raised by the geometry library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("all spanning vectors have (numerically) zero norm")]
    ZeroSpan,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subspace order violated: dim(U) = {dim_u} exceeds dim(V) = {dim_v}")]
    InvalidOrder { dim_u: usize, dim_v: usize },
    #[error("basis is not orthonormal (Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {value} outside the domain of {what}")]
    DomainError { what: &'static str, value: f64 },
    #[error("no point at chordal distance {distance} reachable from the base point")]
    Unreachable { distance: f64 },
    #[error("too many sampling failures: {failures} of {attempts}")]
    TooManyFailures { failures: usize, attempts: usize },
    #[error("degenerate neighborhood: covariance rank {rank} < {required}")]
    DegenerateNeighborhood { rank: usize, required: usize },
    #[error("shrinking ball did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("codimension {0} is not supported by the shrinking-ball estimator")]
    CodimensionUnsupported(usize),
    #[error("no preimage found on the manifold for tangent point")]
    PreimageNotFound,
    #[error("point cloud: {0}")]
    Cloud(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;

impl GeoError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            GeoError::ZeroSpan => "ZeroSpan",
            GeoError::DimensionMismatch { .. } => "DimensionMismatch",
            GeoError::InvalidOrder { .. } => "InvalidOrder",
            GeoError::NotOrthonormal { .. } => "NotOrthonormal",
            GeoError::UnsupportedShape(_) => "UnsupportedShape",
            GeoError::InvalidParameter(_) => "InvalidParameter",
            GeoError::DomainError { .. } => "DomainError",
            GeoError::Unreachable { .. } => "Unreachable",
            GeoError::TooManyFailures { .. } => "TooManyFailures",
            GeoError::DegenerateNeighborhood { .. } => "DegenerateNeighborhood",
            GeoError::NoConvergence(_) => "NoConvergence",
            GeoError::CodimensionUnsupported(_) => "CodimensionUnsupported",
            GeoError::PreimageNotFound => "PreimageNotFound",
            GeoError::Cloud(_) => "Cloud",
        }
    }
}
