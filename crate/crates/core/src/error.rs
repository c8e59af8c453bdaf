use std::fmt;

/// Library-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A numeric precondition failed (zero input, non-prime modulus, ...).
    BadArgument(String),
    /// Matrix shape or rank precondition failed.
    Shape(String),
    /// A matrix that must be invertible is singular.
    Singular,
    /// No modular square root exists for the given residue.
    NoSquareRoot,
    /// CRT moduli were not pairwise coprime.
    NotCoprime,
    /// A lattice operation was called on a non-integral lattice.
    NotIntegral(String),
    /// An operation required a p-saturated or p-maximal lattice and got none.
    Precondition(String),
    /// An exhaustive discriminant-group search would exceed the hard cap.
    ResourceLimit(String),
    /// A genus or local symbol failed validation.
    InvalidSymbol(String),
    /// Text parse error with byte position.
    Parse { pos: usize, msg: String },
    /// A constructed object failed its internal verification.
    Verify(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BadArgument(m) => write!(f, "bad argument: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Singular => write!(f, "singular matrix"),
            Error::NoSquareRoot => write!(f, "no modular square root"),
            Error::NotCoprime => write!(f, "moduli not pairwise coprime"),
            Error::NotIntegral(m) => write!(f, "lattice not integral: {m}"),
            Error::Precondition(m) => write!(f, "precondition failed: {m}"),
            Error::ResourceLimit(m) => write!(f, "resource limit: {m}"),
            Error::InvalidSymbol(m) => write!(f, "invalid symbol: {m}"),
            Error::Parse { pos, msg } => write!(f, "parse error at byte {pos}: {msg}"),
            Error::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl std::error::Error for Error {}
