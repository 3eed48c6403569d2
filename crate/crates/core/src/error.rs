use thiserror::Error;

/// Failures raised by construction, analysis and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty interval: lo = {lo} is not below hi = {hi}")]
    EmptyInterval { lo: String, hi: String },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("intervals are not adjacent and of equal length: {0}")]
    NotAdjacent(String),

    #[error("partition does not tile the interval: {0}")]
    NotTiling(String),

    #[error("query touches the truncated region (0, {0})")]
    TruncatedRegion(String),

    #[error("separation violated at stage {stage} for base {base}")]
    Separation { stage: usize, base: u32 },

    #[error("infeasible schedule: {0}")]
    Infeasible(String),

    #[error("covering bound precondition failed: {0}")]
    CoveringPrecondition(String),

    #[error("no witness found with x <= {x_max}")]
    WitnessNotFound { x_max: u64 },

    #[error("n-adic doubling precondition failed for base {base}: {msg}")]
    NotDoubling { base: u32, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
