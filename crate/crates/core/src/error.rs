use thiserror::Error;

/// Errors raised by the symbolic machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("far set needs rank > 3 for p = 2 (got rank {0})")]
    RankTooSmall(u64),
    #[error("operation not available for this tree family: {0}")]
    WrongFamily(&'static str),
    #[error("enumeration of {needed} items exceeds cap {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("arity mismatch: word expects {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("element is not an involution")]
    NotInvolution,
    #[error("element is not in the base group")]
    NotInBase,
    #[error("iterate does not stabilise level {0}")]
    NotStabilized(usize),
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;
