use crate::symexpr::ParseError;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("chart error: {0}")]
    Chart(String),
    #[error("variable index {index} is not on a chart of dimension {dim}")]
    UnknownVariable { index: usize, dim: usize },
    #[error("unsupported integrand: {0}")]
    UnsupportedIntegrand(String),
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("invalid multi-index {0:?}")]
    InvalidIndex(Vec<usize>),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),
    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("probe has {got} coordinates but the chart has dimension {expected}")]
    ProbeDimension { got: usize, expected: usize },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("no origination: {0}")]
    NoOrigination(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported degree: {0}")]
    UnsupportedDegree(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
