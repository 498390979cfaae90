use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {dim} exceeds the supported cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("singular resolvent: condition estimate {condition:e}")]
    SingularResolvent { condition: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("time ordering violated: t = {t} < s = {s}")]
    Ordering { t: f64, s: f64 },
    #[error("resource guard: {0}")]
    ResourceGuard(String),
    #[error("invalid generator family: {0}")]
    InvalidFamily(String),
    #[error("Picard iteration diverged after {iterations} iterations (last update {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("fixed-point search failed: {0}")]
    NoConvergence(String),
    #[error("degenerate fixed point: {0}")]
    DegenerateFixedPoint(String),
    #[error("inadmissible region: field nearly vanishes at boundary sample {sample:?} (|g| = {norm:e})")]
    InadmissibleRegion { sample: Vec<f64>, norm: f64 },
    #[error("degenerate zero at {point:?}: |det Dg| = {det:e}")]
    DegenerateZero { point: Vec<f64>, det: f64 },
    #[error("winding-number oracle failed: {0}")]
    OracleFailure(String),
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name of the failure class, e.g. `inadmissible-region`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DimensionCap { .. } => "dimension-cap",
            Error::SingularResolvent { .. } => "singular-resolvent",
            Error::Precondition(_) => "precondition",
            Error::InvalidMetric(_) => "invalid-metric",
            Error::Ordering { .. } => "ordering",
            Error::ResourceGuard(_) => "resource-guard",
            Error::InvalidFamily(_) => "invalid-family",
            Error::Divergence { .. } => "divergence",
            Error::NoConvergence(_) => "no-convergence",
            Error::DegenerateFixedPoint(_) => "degenerate-fixed-point",
            Error::InadmissibleRegion { .. } => "inadmissible-region",
            Error::DegenerateZero { .. } => "degenerate-zero",
            Error::OracleFailure(_) => "oracle-failure",
            Error::Configuration(_) => "configuration",
        }
    }
}
