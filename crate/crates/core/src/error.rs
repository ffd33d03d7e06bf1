use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group closure exceeded {bound} elements")]
    OrderBound { bound: usize },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },
    #[error("image array is not a permutation of 0..{degree}")]
    NotAPermutation { degree: usize },
    #[error("selected set is not closed under composition")]
    NotClosed,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("quotient is not abelian")]
    NotAbelian,
    #[error("frame does not have H and Ksub normal in G, so G/H does not act on N")]
    NotNormalFrame,
    #[error("map is not an automorphism of the abelian group")]
    NotAutomorphism,
    #[error("expected a non-negative rational integer, got {0}")]
    NotInteger(String),
    #[error("non-integral value: {0}")]
    NonIntegral(String),
    #[error("table of {cells} cells exceeds the memory budget of {budget}")]
    MemoryBudget { cells: u128, budget: u128 },
    #[error("eta product has non-integral leading exponent {numerator}/24")]
    NonIntegralWeightOffset { numerator: i64 },
    #[error("cross-check mismatch: {0}")]
    CrossCheckMismatch(String),
    #[error("coefficients available up to {available}, requested {requested}")]
    DomainExceeded { available: u64, requested: u64 },
    #[error("insufficient checkpoint span: {0}")]
    InsufficientSpan(String),
    #[error("epsilon {eps} below the truncation floor {floor}")]
    EpsilonTooSmall { eps: f64, floor: f64 },
    #[error("series is identically zero")]
    ZeroSeries,
    #[error("invalid discriminant {0}")]
    InvalidDiscriminant(i64),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("bad fixture: {0}")]
    BadFixture(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
