use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("rank {rank} out of range 1..={max} for dimension {d}")]
    RankOutOfRange { rank: usize, max: usize, d: usize },

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("degenerate action: image is numerically rank-deficient (min |R_jj| = {0:e})")]
    DegenerateAction(f64),

    #[error("support cap of {cap} atoms exceeded at convolution power {achieved_n}")]
    SupportCap { cap: usize, achieved_n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("instability: log-scale {0:e} exceeds the allowed bound")]
    Instability(f64),

    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("empty measure")]
    EmptyMeasure,

    #[error("dimension bound undefined: gap {gap} is not above 3 standard errors ({stderr})")]
    BoundUndefined { gap: f64, stderr: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
