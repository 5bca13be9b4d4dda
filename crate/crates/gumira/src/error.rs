use thiserror::Error;

/// Errors shared by the whole crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameters must be positive, got a = {a}, b = {b}")]
    NonPositiveParams { a: f64, b: f64 },

    #[error("cycle entry {index} is not positive")]
    NonPositiveBeta { index: usize },

    #[error("orbit diverged at step {step}, last finite point ({x}, {y})")]
    DivergedOrbit { step: usize, x: f64, y: f64 },

    #[error("level h = {h} is empty (below h_min = {h_min})")]
    EmptyLevel { h: f64, h_min: f64 },

    #[error("branch {branch} does not exist on a level of topology {topology}")]
    BranchMismatch {
        branch: &'static str,
        topology: &'static str,
    },

    #[error("level h = {h} has topology {topology}; a closed oval is required")]
    WrongTopology { h: f64, topology: &'static str },

    #[error("step size underflow while integrating the level flow")]
    IntegrationFailure,

    #[error("flow did not return to the section within the time cap")]
    NoReturn,

    #[error("no sign change of rho - {target} across the bracket [{lo}, {hi}]")]
    NoBracket { target: f64, lo: f64, hi: f64 },

    #[error("iteration limit reached: {context}")]
    MaxIterations { context: &'static str },

    #[error("{context}: argument outside the admissible domain")]
    DomainError { context: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable code, used by the CLI for exit diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveParams { .. } => "non-positive-params",
            Error::NonPositiveBeta { .. } => "non-positive-beta",
            Error::DivergedOrbit { .. } => "diverged-orbit",
            Error::EmptyLevel { .. } => "empty-level",
            Error::BranchMismatch { .. } => "branch-mismatch",
            Error::WrongTopology { .. } => "wrong-topology",
            Error::IntegrationFailure => "integration-failure",
            Error::NoReturn => "no-return",
            Error::NoBracket { .. } => "no-bracket",
            Error::MaxIterations { .. } => "max-iterations",
            Error::DomainError { .. } => "domain-error",
        }
    }
}
