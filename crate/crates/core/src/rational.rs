//! Exact rational numbers.
//!
//! Everything in the trusted path is computed with [`Rational`], an
//! arbitrary-precision fraction kept in lowest terms with a positive
//! denominator. Zero is always `0/1`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
}

/// Builds the canonical fraction `numerator / denominator`.
pub fn normalize(
    numerator: impl Into<BigInt>,
    denominator: impl Into<BigInt>,
) -> Result<Rational, ArithError> {
    let denominator = denominator.into();
    if denominator.is_zero() {
        return Err(ArithError::ZeroDenominator);
    }
    Ok(Rational::new(numerator.into(), denominator))
}

/// Parses `"p"`, `"-p"` or `"p/q"` (surrounding whitespace ignored).
pub fn parse_rational(text: &str) -> Result<Rational, ArithError> {
    let text = text.trim();
    let bad = || ArithError::Parse(text.to_string());
    let int = |s: &str| BigInt::from_str(s.trim()).map_err(|_| bad());
    match text.split_once('/') {
        Some((num, den)) => normalize(int(num)?, int(den)?),
        None => Ok(Rational::from_integer(int(text)?)),
    }
}

pub fn rational(numerator: i64, denominator: i64) -> Rational {
    normalize(numerator, denominator).expect("nonzero denominator")
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn is_canonical(value: &Rational) -> bool {
    use num_integer::Integer;
    value.denom().is_positive()
        && value.numer().gcd(value.denom()).is_one()
        && (!value.numer().is_zero() || value.denom().is_one())
}

/// `n * (n-1) * ... * (n-k+1)`.
pub fn falling_factorial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| (n - i) as u128).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `count / total` as an exact fraction.
pub fn ratio(count: u128, total: u128) -> Rational {
    normalize(BigInt::from(count), BigInt::from(total)).expect("nonzero total")
}
