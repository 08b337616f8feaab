use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rk4 step {step} fails the local error heuristic (estimate {estimate:.3e})")]
    StepTooLarge { step: f64, estimate: f64 },

    #[error("segment {segment} is not piecewise constant; exact propagation unavailable")]
    UnsupportedProfile { segment: usize },

    #[error("interval mismatch: {0}")]
    IntervalMismatch(String),

    #[error("|alpha(k)| = {magnitude:.3e} is below the resonance threshold")]
    ResonanceDivision { magnitude: f64 },

    #[error("tail branch undefined: k^2 equals c^2 for c = {c}")]
    BranchUndefined { c: f64 },

    #[error("log of tau undefined: tau = 0")]
    LogBranch,

    #[error("|W| = {magnitude:.3e} is below the Wronskian threshold")]
    WronskianZero { magnitude: f64 },

    #[error("Gamma pole in inner product weight at (p, q) = ({p}, {q})")]
    GammaPole { p: usize, q: f64 },

    #[error("truncation tail {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    TruncationOverflow { estimate: f64, tolerance: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("|denominator| = {magnitude:.3e} is below the pole threshold")]
    DenominatorZero { magnitude: f64 },

    #[error("quadrature needs {needed} panels, budget is {budget}")]
    QuadratureBudget { needed: usize, budget: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Short stable name used in tabular output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::UnsupportedProfile { .. } => "UnsupportedProfile",
            Error::IntervalMismatch(_) => "IntervalMismatch",
            Error::ResonanceDivision { .. } => "ResonanceDivision",
            Error::BranchUndefined { .. } => "BranchUndefined",
            Error::LogBranch => "LogBranch",
            Error::WronskianZero { .. } => "WronskianZero",
            Error::GammaPole { .. } => "GammaPole",
            Error::TruncationOverflow { .. } => "TruncationOverflow",
            Error::DomainViolation(_) => "DomainViolation",
            Error::DenominatorZero { .. } => "DenominatorZero",
            Error::QuadratureBudget { .. } => "QuadratureBudget",
            Error::InvalidPotential(_) => "InvalidPotential",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
