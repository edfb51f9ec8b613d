use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("valuation of zero")]
    ValuationOfZero,
    #[error("incompatible context: {0}")]
    IncompatibleContext(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("singular matrix")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not in subgroup: {0}")]
    NotInSubgroup(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("level cap exceeded at level {0}")]
    LevelCap(u32),
    #[error("truncation cap exceeded: {0}")]
    TruncationCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
