use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha must lie in (0, 2), got {0}")]
    InvalidAlpha(f64),
    #[error("Pareto shape {shape} must exceed alpha/2 = {half_alpha}")]
    DivergentIntegral { shape: f64, half_alpha: f64 },
    #[error("moment of order {order} diverges: {reason}")]
    DivergentMoment { order: usize, reason: String },
    #[error("moment order {0} exceeds the composition enumeration limit of 20")]
    DivergentCost(usize),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("point {re} + {im}i lies in the support of nu")]
    PointInSupport { re: f64, im: f64 },
    #[error("nu is degenerate (single atom); the limit law has no density")]
    DegenerateMeasure,
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),
    #[error("cannot self-normalize the zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row {0} of the data matrix is zero after redraw")]
    ZeroRow(usize),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("z = {re} + {im}i lies on the spectral axis [0, inf)")]
    PointOnSpectrumAxis { re: f64, im: f64 },
    #[error("z must be real negative, got {0}")]
    InvalidZ(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}
