use thiserror::Error;

use crate::tracer::TraceStatus;

/// Errors raised by the library. Numerical failures during path lifting are
/// reported through [`TraceStatus`] instead and only surface here when an
/// operation cannot produce a result at all.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("point {point:?} lies outside the open {which} domain")]
    DomainViolation { which: &'static str, point: Vec<f64> },

    #[error("seed is not a zero: residual norm {residual:e} exceeds {tol:e}")]
    SeedNotOnZ { residual: f64, tol: f64 },

    #[error("D_yF at the seed is not left-invertible (sigma_min {sigma_min:e})")]
    SeedRankDeficient { sigma_min: f64 },

    #[error("chart does not fit the problem: {0}")]
    ChartDomainMismatch(String),

    #[error("scalar map is not monotone: derivative changes sign near {at}")]
    NonMonotone { at: f64 },

    #[error("weight is not positive at t = {t}: value {value}")]
    NonPositiveValue { t: f64, value: f64 },

    #[error("corrector did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("D_yF lost full column rank (sigma_min {sigma_min:e})")]
    RankLoss { sigma_min: f64 },

    #[error("iterate left the open y-domain at {point:?}")]
    BoundaryEscape { point: Vec<f64> },

    #[error("predicted step {norm:e} exceeds the trust bound {bound:e}")]
    PredictorBlowup { norm: f64, bound: f64 },

    #[error("target is unreachable: lift ended with {0}")]
    Unreachable(TraceStatus),

    #[error("unknown example {0:?}")]
    UnknownExample(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("tube curve is degenerate: |gamma'| vanishes near y1 = {at}")]
    DegenerateTube { at: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
