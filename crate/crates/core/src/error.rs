use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input vector is not unit length (|u| = {norm})")]
    NonUnitInput { norm: f64 },

    #[error("finite differences produced a non-finite value at {context}")]
    DerivativeFailure { context: String },

    #[error("convexity violated: min eigenvalue of D^2F + F I is {min_eigenvalue:e} at {at:?}")]
    ConvexityViolation { min_eigenvalue: f64, at: Vec<f64> },

    #[error("translation parameter t must be nonzero")]
    ZeroT,

    #[error("patch is not an immersion at {params:?} (smallest singular value {sigma:e})")]
    RankDeficient { params: Vec<f64>, sigma: f64 },

    #[error("anisotropic parallel translation is degenerate: |1 - t*lambda| = {gap:e}")]
    DegenerateTranslation { gap: f64 },

    #[error("focal map requires a nonzero curvature")]
    ZeroCurvature,

    #[error("{lambda} is not a curvature group value at {params:?}")]
    NotACurvature { lambda: f64, params: Vec<f64> },

    #[error("leaf integration drifted off the focal point by {drift:e} at step {step:e}")]
    LeafDrift { drift: f64, step: f64 },

    #[error("curvature groups drift by {drift:e} along the leaf (tolerance {tol:e})")]
    NotIsoparametric { drift: f64, tol: f64 },

    #[error("antipodal leaf point not found (best residual {residual:e})")]
    AntipodeNotFound { residual: f64 },

    #[error("{context} did not converge")]
    NoConvergence { context: String },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown catalog name `{0}`")]
    UnknownEntry(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("io error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonUnitInput { .. }
                | Error::InvalidParams(_)
                | Error::UnknownEntry(_)
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::ZeroT
                | Error::ZeroCurvature
                | Error::NotACurvature { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
