use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{Polynomial, RationalError};

/// Univariate rational function `numerator / denominator` over the exact
/// rationals.
///
/// Values are always kept canonical: numerator and denominator are coprime
/// and the denominator is monic. Structural equality is therefore the same as
/// equality of rational functions. Zero is `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, RationalError> {
        if den.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Polynomial, den: Polynomial) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let lc = den.leading().expect("nonzero denominator").clone();
        if !lc.is_one() {
            let inv = lc.recip();
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(c.into()))
    }

    /// The identity function `t`.
    pub fn x() -> Self {
        Self::from_polynomial(Polynomial::x())
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Self {
            num: p,
            den: Polynomial::one(),
        }
    }

    /// `t - root`
    pub fn linear(root: &BigRational) -> Self {
        Self::from_polynomial(Polynomial::linear_root(root.clone()))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, RationalError> {
        if rhs.is_zero() {
            return Err(RationalError::DivisionByZero);
        }
        Ok(Self::canonical(&self.num * &rhs.den, &self.den * &rhs.num))
    }

    pub fn recip(&self) -> Result<Self, RationalError> {
        Self::one().checked_div(self)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::canonical(self.num.scale(s), self.den.clone())
    }

    pub fn powi(&self, e: i32) -> Result<Self, RationalError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let e = e.unsigned_abs();
        Ok(Self::canonical(base.num.pow(e), base.den.pow(e)))
    }

    /// Quotient-rule derivative.
    pub fn derivative(&self) -> Self {
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::canonical(top, &self.den * &self.den)
    }

    pub fn eval(&self, x: &BigRational) -> Result<BigRational, RationalError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(RationalError::Pole(x.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> Result<f64, RationalError> {
        let d = self.den.eval_f64(x);
        if d == 0.0 || !d.is_finite() {
            return Err(RationalError::Pole(x));
        }
        Ok(self.num.eval_f64(x) / d)
    }

    /// Human-readable form, e.g. `(3*t^2 - 1)/(t - 2)`.
    pub fn render(&self, var: &str) -> String {
        let mut s = String::new();
        self.write_with(&mut s, var).expect("writing to String");
        s
    }

    fn write_with(&self, f: &mut impl fmt::Write, var: &str) -> fmt::Result {
        if self.den.is_constant() {
            // Canonical form makes a constant denominator exactly 1.
            self.num.write_with(f, var)?;
            return Ok(());
        }
        let mut top = String::new();
        let terms = self.num.write_with(&mut top, var)?;
        if terms > 1 {
            write!(f, "({top})")?;
        } else {
            f.write_str(&top)?;
        }
        let mut bottom = String::new();
        let terms = self.den.write_with(&mut bottom, var)?;
        if terms > 1 || bottom.contains('*') {
            write!(f, "/({bottom})")
        } else {
            write!(f, "/{bottom}")
        }
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, "t")
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.den == rhs.den {
            return RationalFunction::canonical(&self.num + &rhs.num, self.den.clone());
        }
        RationalFunction::canonical(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::canonical(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, rhs: RationalFunction) -> RationalFunction {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, rhs: &RationalFunction) -> RationalFunction {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        -&self
    }
}

impl From<Polynomial> for RationalFunction {
    fn from(p: Polynomial) -> Self {
        Self::from_polynomial(p)
    }
}

impl Zero for RationalFunction {
    fn zero() -> Self {
        RationalFunction::zero()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}
