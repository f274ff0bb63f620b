use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variant names are stable: the CLI reports them verbatim in per-cell
/// error fields.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} is outside the tabulated range [-{bound}, {bound}]")]
    IndexOutOfTable { index: i64, bound: i64 },

    #[error("node index {index} is outside the window -{n}..={n}")]
    IndexOutOfWindow { index: i64, n: usize },

    #[error("evaluation point collides with node {index} at working precision")]
    NodeCollision { index: i64 },

    #[error("tail series cannot be certified convergent: {reason}")]
    DivergentTail { reason: String },

    #[error("tail remainder bound {bound:e} did not reach tolerance after {terms} terms")]
    ToleranceUnreachable { terms: usize, bound: f64 },

    #[error("coefficient (f, e_{index}) vanishes inside the window")]
    ZeroCoefficientInWindow { index: i64 },

    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolveFailed { residual: f64, tolerance: f64 },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPsd { pivot: usize, value: f64 },

    #[error("all queried coefficients vanish")]
    EmptySupport,

    #[error("Gram matrix is singular at working precision (condition estimate {condition_estimate:e})")]
    SingularGram { condition_estimate: f64 },

    #[error("refined bound denominator vanishes while its numerator does not")]
    DegenerateDenominator,

    #[error("requested |k| = {requested} exceeds N/4 = {limit} for a grid of {points} points")]
    GridTooCoarse { requested: usize, limit: usize, points: usize },

    #[error("Fourier coefficient at index {index} is zero")]
    ZeroCoefficient { index: i64 },

    #[error("no sign change of the Fourier transform found in (0, {upper}]")]
    NoZeroFound { upper: f64 },

    #[error("target index {k} must satisfy |k| < n = {n}")]
    TargetOutsideWindow { k: i64, n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short variant name, used in machine-readable reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::IndexOutOfTable { .. } => "IndexOutOfTable",
            Error::IndexOutOfWindow { .. } => "IndexOutOfWindow",
            Error::NodeCollision { .. } => "NodeCollision",
            Error::DivergentTail { .. } => "DivergentTail",
            Error::ToleranceUnreachable { .. } => "ToleranceUnreachable",
            Error::ZeroCoefficientInWindow { .. } => "ZeroCoefficientInWindow",
            Error::SolveFailed { .. } => "SolveFailed",
            Error::NotPsd { .. } => "NotPSD",
            Error::EmptySupport => "EmptySupport",
            Error::SingularGram { .. } => "SingularGram",
            Error::DegenerateDenominator => "DegenerateDenominator",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::ZeroCoefficient { .. } => "ZeroCoefficient",
            Error::NoZeroFound { .. } => "NoZeroFound",
            Error::TargetOutsideWindow { .. } => "TargetOutsideWindow",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
