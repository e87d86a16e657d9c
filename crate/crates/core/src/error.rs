use thiserror::Error;

/// Errors raised by the valuation and risk engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum XosError {
    #[error("invalid cross-ownership structure: {0}")]
    InvalidStructure(String),

    #[error("invalid asset scenario: {0}")]
    InvalidScenario(String),

    #[error("fixed-point iteration did not converge within {max_iter} iterations (last change {last_change:e})")]
    NonConvergence { max_iter: usize, last_change: f64 },

    #[error("operation requires {expected} cross-ownership, got {actual}")]
    WrongXosType {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("sample variance of firm values is zero; lognormal matching undefined")]
    DegenerateVariance,

    #[error("no root of the regime equation in ({lo}, {hi})")]
    NoRoot { lo: f64, hi: f64 },

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, XosError>;
