use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("degenerate translation direction: alpha must have a nonzero entry")]
    DegenerateDirection,

    #[error("xi = {xi} lies outside the open domain ({a}, {b})")]
    OutOfDomain { xi: f64, a: f64, b: f64 },

    #[error("{what} must be positive, got {value} at xi = {xi}")]
    NonPositive {
        what: &'static str,
        value: f64,
        xi: f64,
    },

    #[error("non-finite value for {what} at xi = {xi}")]
    NonFinite { what: &'static str, xi: f64 },

    #[error("singular metric: pivot {pivot:e} below threshold")]
    SingularMetric { pivot: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Lambert W argument {x} outside the domain of the {branch} branch")]
    LambertDomain { x: f64, branch: &'static str },

    #[error("integrand singular in [{lo}, {hi}]: {reason}")]
    Singularity { lo: f64, hi: f64, reason: String },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("quadrature failed to converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },

    #[error("empty effective domain after margins: [{lo}, {hi}]")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid spec document: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
