use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::parse_rational;

/// A scalar parameter that is exact when it was given as an integer, fraction
/// or terminating decimal, and a float otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Float(f64),
}

impl Number {
    pub fn int(n: i64) -> Self {
        Number::Exact(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Number::Exact(BigRational::new(n.into(), d.into()))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Number::Exact(q) => Some(q),
            Number::Float(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_zero(),
            Number::Float(x) => *x == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_positive(),
            Number::Float(x) => *x > 0.0,
        }
    }

    /// Integer value, if the number is an exact integer or a float with no
    /// fractional part.
    pub fn as_integer(&self) -> Option<i64> {
        match self {
            Number::Exact(q) if q.is_integer() => q.to_integer().to_i64(),
            Number::Float(x) if x.fract() == 0.0 && x.abs() < 2f64.powi(53) => Some(*x as i64),
            _ => None,
        }
    }

    fn combine(
        &self,
        rhs: &Number,
        exact: impl FnOnce(&BigRational, &BigRational) -> Option<BigRational>,
        float: impl FnOnce(f64, f64) -> f64,
    ) -> Number {
        if let (Number::Exact(a), Number::Exact(b)) = (self, rhs) {
            if let Some(q) = exact(a, b) {
                return Number::Exact(q);
            }
        }
        Number::Float(float(self.to_f64(), rhs.to_f64()))
    }

    pub fn add(&self, rhs: &Number) -> Number {
        self.combine(rhs, |a, b| Some(a + b), |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Number) -> Number {
        self.combine(rhs, |a, b| Some(a - b), |a, b| a - b)
    }

    pub fn mul(&self, rhs: &Number) -> Number {
        self.combine(rhs, |a, b| Some(a * b), |a, b| a * b)
    }

    /// Exact division falls back to floats (giving `inf`/`NaN`) on a zero
    /// divisor; callers validate divisors first.
    pub fn div(&self, rhs: &Number) -> Number {
        self.combine(rhs, |a, b| (!b.is_zero()).then(|| a / b), |a, b| a / b)
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Exact(q) => Number::Exact(-q),
            Number::Float(x) => Number::Float(-x),
        }
    }

    /// Equality, exact when both sides are exact and otherwise to relative
    /// `rel_tol` (with an absolute floor of `rel_tol`).
    pub fn approx_eq(&self, rhs: &Number, rel_tol: f64) -> bool {
        match (self, rhs) {
            (Number::Exact(a), Number::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), rhs.to_f64());
                (a - b).abs() <= rel_tol * a.abs().max(b.abs()).max(1.0)
            }
        }
    }
}

impl From<i64> for Number {
    fn from(n: i64) -> Self {
        Number::int(n)
    }
}

impl From<BigRational> for Number {
    fn from(q: BigRational) -> Self {
        Number::Exact(q)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Float(x)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(q) => write!(f, "{q}"),
            // Always with an exponent, so the value re-parses as a float
            // rather than an exact decimal.
            Number::Float(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("not a number: {0:?}")]
pub struct ParseNumberError(pub String);

impl FromStr for Number {
    type Err = ParseNumberError;

    /// Integers, fractions and terminating decimals parse exactly; anything
    /// else that `f64` accepts (exponents, `inf`) becomes a float.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(q) = parse_rational(s) {
            return Ok(Number::Exact(q));
        }
        match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Number::Float(x)),
            _ => Err(ParseNumberError(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_kinds() {
        assert_eq!("7/2".parse::<Number>().unwrap(), Number::ratio(7, 2));
        assert_eq!("-0.25".parse::<Number>().unwrap(), Number::ratio(-1, 4));
        assert_eq!("1e-3".parse::<Number>().unwrap(), Number::Float(1e-3));
        assert!("x".parse::<Number>().is_err());
        assert!("nan".parse::<Number>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["7/2", "-3", "0.001", "1e-3", "2.5e10"] {
            let n: Number = s.parse().unwrap();
            assert_eq!(n.to_string().parse::<Number>().unwrap(), n);
        }
        assert_eq!(Number::Float(3.0).to_string(), "3e0");
        assert_eq!("3e0".parse::<Number>().unwrap(), Number::Float(3.0));
    }

    #[test]
    fn arithmetic_stays_exact() {
        let a = Number::ratio(1, 3);
        let b = Number::int(2);
        assert_eq!(a.mul(&b).add(&a), Number::int(1));
        assert!(!a.div(&Number::int(0)).is_exact());
        assert!(a.add(&Number::Float(0.5)).approx_eq(&Number::Float(5.0 / 6.0), 1e-15));
    }
}
