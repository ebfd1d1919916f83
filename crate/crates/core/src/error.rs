use crate::rational::Rational;

/// Why a filler move was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoveViolation {
    #[error("processor count p={p} outside 1..={n}")]
    ProcessorCount { p: usize, n: usize },
    #[error("move addresses {got} cups but the state has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("addition {value} at index {index} outside [0, 1]")]
    AdditionOutOfRange { index: usize, value: Rational },
    #[error("additions sum to {sum}, expected p={p}")]
    SumMismatch { sum: Rational, p: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("invalid filler move: {0}")]
    InvalidFillerMove(#[from] MoveViolation),
    #[error("emptier selected {got} cups, round requires {expected}")]
    WrongEmptierSize { expected: usize, got: usize },
    #[error("emptier index {index} out of range for {n} cups")]
    EmptierIndexOutOfRange { index: usize, n: usize },
    #[error("emptier index {0} selected twice")]
    DuplicateEmptierIndex(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid variant: {0}")]
    InvalidVariant(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("strategy failure: {0}")]
    Strategy(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("internal defect: {0}")]
    Defect(String),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
