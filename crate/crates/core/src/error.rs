use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid letter {0:?}: words are strings over {{0,1}}")]
    InvalidLetter(char),
    #[error("invalid slope {0:?}: expected p/q with 0 <= p <= q and q > 0")]
    InvalidSlope(String),
    #[error("invalid rational {0:?}")]
    InvalidRational(String),
    #[error("the periodic word must have a non-empty cycle")]
    EmptyCycle,
    #[error("the word is balanced, but an unbalanced word is required")]
    BalancedInput,
    #[error("the word must be purely periodic (empty preperiod)")]
    NotRecurrent,
    #[error("matrix determinant must be positive, got {0}")]
    NonPositiveDeterminant(String),
    #[error("matrix must be unimodular (det = 1), got det = {0}")]
    NotUnimodular(String),
    #[error("matrix is elliptic or scalar; it has no real projective fixed points")]
    NoRealFixedPoints,
    #[error("generator parameter out of range: {0}")]
    GeneratorRange(String),
    #[error("the pair is not balanced (class: {0})")]
    NotBalanced(String),
    #[error("the pair has no exact unimodular normalization (determinant is not a rational square)")]
    InexactNormalization,
    #[error("normal form verification failed: {0}")]
    NormalForm(String),
    #[error("enumeration bound exceeded: {0}")]
    TooLarge(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("certificate violated: {0}")]
    Certificate(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
