use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("conductance undefined: one side of the cut has zero volume")]
    ZeroVolume,
    #[error("iteration did not converge: L1 residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("n = {n} exceeds the dense limit of {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("degenerate mean-field model: {0}")]
    DegenerateModel(String),
    #[error("mean-field 3x3 system is numerically singular")]
    SingularSystem,
    #[error("invalid model shape: {0}")]
    InvalidShape(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("seed node {0} has degree 0")]
    DanglingSeed(u32),
    #[error("node {0} has degree 0")]
    DanglingNode(u32),
    #[error("score map has empty support")]
    EmptySupport,
    #[error("push budget of {budget} operations exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("reference vector has zero L2 norm")]
    ZeroNorm,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
