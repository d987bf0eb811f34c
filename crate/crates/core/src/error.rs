use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {index} does not belong to a field of order {order}")]
    FieldMismatch { index: usize, order: usize },
    #[error("a line needs two distinct points")]
    IdenticalPoints,
    #[error("base set is not an oval: {0}")]
    NotAnOval(String),
    #[error("order {0} is not supported by this construction")]
    UnsupportedOrder(usize),
    #[error("construction failed validation: {0}")]
    ConstructionInvalid(String),
    #[error("order {0} has the wrong parity for this construction")]
    WrongParity(usize),
    #[error("canonical cone-to-polynomial map is not an isomorphism: {0}")]
    NotIsomorphicUnderCanonicalMap(String),
    #[error("circles {a} and {b} meet in {size} points")]
    UnexpectedIntersectionSize { a: usize, b: usize, size: usize },
    #[error("non-integer eigenvalue in intersection matrix spectrum")]
    NonIntegerEigenvalue,
    #[error("relations do not form an association scheme")]
    NotAScheme,
    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("bad arguments: {0}")]
    BadArguments(String),
}

pub type Result<T> = std::result::Result<T, Error>;
