//! Exact univariate polynomial and rational-function arithmetic over the
//! arbitrary-precision rationals.

mod function;
mod number;
mod parse;
mod polynomial;

pub use function::RationalFunction;
pub use number::{Number, ParseNumberError};
pub use parse::{parse, parse_rational};
pub use polynomial::Polynomial;

use num_rational::BigRational;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RationalError {
    #[error("rational function with zero denominator")]
    ZeroDenominator,
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("evaluation at a pole (t = {0})")]
    Pole(f64),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Shorthand for building exact rationals in code and tests.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}
