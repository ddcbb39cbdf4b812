use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ambient dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("curvature scale must be at least 1, got {0}")]
    BadCurvature(f64),
    #[error("point violates the hyperboloid constraint by {0:.3e}")]
    OffHyperboloid(f64),
    #[error("tangent vector speed {speed} deviates from 1 beyond {tol:.1e}")]
    NotUnitSpeed { speed: f64, tol: f64 },
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("arc length {0} exceeds the supported cap {1}")]
    DistanceCapExceeded(f64, f64),
    #[error("point lies outside the open unit Klein ball (|p| = {0})")]
    OutsideKleinBall(f64),
    #[error("base points too close for a stable probe (separation {0:.3e}, minimum {1:.3e})")]
    ProbeTooClose(f64, f64),
    #[error("grid index {0:?} has no full central-difference stencil")]
    NoInteriorStencil(Vec<usize>),
    #[error("tangent frame is degenerate at grid index {0:?}")]
    DegenerateFrame(Vec<usize>),
    #[error("first fundamental form is not positive definite (min eigenvalue {0:.3e})")]
    NotImmersed(f64),
    #[error("slope parameters out of range: alpha = {alpha}, beta = {beta}")]
    SlopeOutOfRange { alpha: f64, beta: f64 },
    #[error("shape eigenvalue {0} lies outside the open interval (-1, 1)")]
    EigenvalueOutOfRange(f64),
    #[error("need {needed} affinely independent samples, found affine rank {rank}")]
    TooFewSamples { needed: usize, rank: usize },
    #[error("hull construction failed: {0}")]
    HullConstruction(String),
    #[error("mesh degenerated during the flow: {0}")]
    MeshDegenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
