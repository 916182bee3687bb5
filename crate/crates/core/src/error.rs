use thiserror::Error;

/// Errors raised by parsing, evaluation, moves, the oracle and the bench harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("count mismatch in {section}: declared {declared}, found {found}")]
    CountMismatch {
        section: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("item {item} assigned to invalid city {city} (n = {n})")]
    BadItemCity { item: usize, city: usize, n: usize },
    #[error("non-positive value: {0}")]
    NonPositiveValue(String),
    #[error("malformed row: {0}")]
    MalformedRow(String),
    #[error("collected weight {weight} exceeds capacity {capacity}")]
    CapacityExceeded { weight: f64, capacity: f64 },
    #[error("empty sequence")]
    EmptySequence,
    #[error("invalid segment positions ({k1}, {k2}) for a tour of {n} cities")]
    BadPositions { k1: usize, k2: usize, n: usize },
    #[error("invalid tour: {0}")]
    InvalidTour(String),
    #[error("plan length {found} does not match item count {expected}")]
    PlanLength { expected: usize, found: usize },
    #[error("infeasible instance: {0}")]
    InfeasibleInstance(String),
    #[error("instance too large for exhaustive search: {0} candidate solutions")]
    TooLarge(f64),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("bench: {0}")]
    Bench(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
