use num_bigint::BigInt;

use crate::series::{Exponents, Rational};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series belong to different rings")]
    RingMismatch,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("invalid variable specification: {0}")]
    InvalidSpec(String),

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("constant term is zero, series is not invertible")]
    ZeroConstantTerm,

    #[error("constant term must be {expected}, found {found}")]
    WrongConstantTerm { expected: Rational, found: Rational },

    /// A non-constant monomial that neither carries a small variable nor is a
    /// positive phase monomial; its powers never leave the truncation window.
    #[error("monomial {0:?} lies outside the expansion region")]
    InadmissibleMonomial(Exponents),

    #[error("cannot bind `{var}`: {reason}")]
    InvalidBinding { var: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid toric data: {0}")]
    InvalidToricData(String),

    #[error("basis cone is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),

    #[error("point {0} is not an integral combination of the basis cone")]
    NonIntegral(usize),

    #[error("unsupported framing: {0}")]
    UnsupportedFraming(String),

    #[error("z window {window} cannot hold exponent weight {needed} of `{var}`")]
    WindowTooSmall { var: String, window: u32, needed: i64 },

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("Newton iteration left a nonzero residual after {0} rounds")]
    ResidualNonzero(usize),

    #[error(
        "untwisted gluing equation has leading constant {0}; the right-hand side is not in the \
         maximal ideal, so no solution exists"
    )]
    UntwistedObstruction(Rational),

    #[error("{count} logarithmic term(s) in `{var}`; term-wise integration is undefined")]
    LogarithmicTerms { var: String, count: usize },

    #[error("unknown case `{0}`")]
    UnknownCase(String),

    #[error("configuration error: {0}")]
    Config(String),
}
