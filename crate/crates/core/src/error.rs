use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hypothesis space must contain at least one hypothesis")]
    EmptySpace,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("domain size {size} exceeds the maximum of {max}")]
    DomainTooLarge { size: usize, max: usize },

    #[error("domain index {index} out of range for domain of size {domain_size}")]
    IndexOutOfRange { index: usize, domain_size: usize },

    #[error("subset of size {size} exceeds the pattern bit budget of {max}")]
    SubsetTooLarge { size: usize, max: usize },

    #[error("subset elements must be strictly increasing")]
    UnsortedSubset,

    #[error("domain size {size} is too large for the brute-force oracle (max {max})")]
    DomainTooLargeForOracle { size: usize, max: usize },

    #[error("domain size {size} is too large for exhaustive enumeration (max {max})")]
    DomainTooLargeForEnumeration { size: usize, max: usize },

    #[error("similarity lift needs a base domain of at least 2 elements, got {0}")]
    PairDomainEmpty(usize),

    #[error("chain elements must be distinct and at least two long")]
    DuplicateElements,

    #[error("pair set is not a forest")]
    NotAForest,

    #[error("invalid pair ({0}, {1}): expected first < second")]
    InvalidPair(usize, usize),

    #[error("invalid Sauer query: {0}")]
    InvalidQuery(String),

    #[error("value {0} out of range")]
    OutOfRange(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
