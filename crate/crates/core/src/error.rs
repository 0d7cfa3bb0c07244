use std::fmt;

/// Errors raised by the arithmetic layer, the bracket engine and the
/// asymptotics tooling.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two values of different pi^2-grades were added. Every bracket lives in
    /// a single grade, so this always means a bookkeeping bug upstream.
    #[error("grade mismatch: cannot add a pi^{} term to a pi^{} term", 2 * .left, 2 * .right)]
    GradeMismatch { left: i32, right: i32 },

    #[error("grading invariant violated for {key}: computed grade {found}, expected {expected}")]
    GradeViolation {
        key: String,
        expected: i32,
        found: i32,
    },

    #[error("recursion edge does not lower the level: {parent} -> {child}")]
    NonTerminating { parent: String, child: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error(
        "capability exceeded at (g, n) = ({g}, {n}): level {level} is above the limit {max_level} \
         (estimated cost ~{estimated_keys} memo entries)"
    )]
    Capability {
        g: u32,
        n: u32,
        level: u32,
        max_level: u32,
        estimated_keys: u64,
    },

    #[error("cache line {line}: {reason}")]
    CacheFormat { line: usize, reason: String },

    #[error("cache version mismatch: expected `{expected}`, found `{found}`")]
    CacheVersion { expected: String, found: String },

    #[error("cache line {line}: conflicting value for {key}")]
    CacheConflict { line: usize, key: String },

    #[error("unknown predicted coefficient `{0}`")]
    UnknownCoefficient(String),

    #[error("fit needs at least {needed} points, got {got}")]
    NotEnoughPoints { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl fmt::Display) -> Self {
        Error::InvalidInput(msg.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
