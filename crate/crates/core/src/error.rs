use alloc::string::String;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,
    #[error("sample {index} lies outside the unit cube")]
    OutOfDomain { index: usize },
    #[error("quadrature did not reach tolerance {tolerance:e} within {budget} subdivisions")]
    QuadratureFailure { tolerance: f64, budget: usize },
    #[error("rejection sampler acceptance rate {rate:e} is below 1e-4")]
    RejectionBudgetExceeded { rate: f64 },
    #[error("incompatible trees: {0}")]
    IncompatibleTrees(&'static str),
    #[error("difference tree is identically zero")]
    ZeroDelta,
    #[error("sup-norm bound needs sigma > D/p, got sigma = {sigma} and D/p = {d_over_p}")]
    NotSupBounded { sigma: f64, d_over_p: f64 },
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("infeasible epsilon {eps}: {reason}")]
    InfeasibleEpsilon { eps: f64, reason: String },
    #[error("Besov ball violation: norm {norm} exceeds radius {radius}")]
    BallViolation { norm: f64, radius: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid density model: {0}")]
    InvalidModel(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySample => "EmptySample",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::RejectionBudgetExceeded { .. } => "RejectionBudgetExceeded",
            Error::IncompatibleTrees(_) => "IncompatibleTrees",
            Error::ZeroDelta => "ZeroDelta",
            Error::NotSupBounded { .. } => "NotSupBounded",
            Error::RegimeMismatch(_) => "RegimeMismatch",
            Error::InfeasibleEpsilon { .. } => "InfeasibleEpsilon",
            Error::BallViolation { .. } => "BallViolation",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidModel(_) => "InvalidModel",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
