//! Parser for the textual rational-function grammar used in reports and test
//! fixtures:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? integer)?
//! atom   := number | variable | '(' expr ')'
//! number := digits ('.' digits)? ('/' digits)?
//! ```
//!
//! A number written `7/2` is a single rational literal, which makes the
//! rendered output (`7/2*t`) parse back without precedence surprises.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{RationalError, RationalFunction};

pub fn parse(src: &str, var: &str) -> Result<RationalFunction, RationalError> {
    let mut p = Parser { src, pos: 0, var };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

/// Parses an exact rational literal: an integer, a fraction `p/q` or a
/// terminating decimal.
pub fn parse_rational(src: &str) -> Option<BigRational> {
    let s = src.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n = decimal(n.trim())?;
        let d = decimal(d.trim())?;
        if d.is_zero() {
            return None;
        }
        n / d
    } else {
        decimal(body)?
    };
    Some(if neg { -value } else { value })
}

fn decimal(s: &str) -> Option<BigRational> {
    if s.is_empty() {
        return None;
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let d = num_traits::pow(BigInt::from(10u8), frac.len());
    Some(BigRational::new(n, d))
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    var: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> RationalError {
        RationalError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<RationalFunction, RationalError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction, RationalError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                let rhs = self.unary()?;
                acc = acc.checked_div(&rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<RationalFunction, RationalError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction, RationalError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        self.skip_ws();
        let len = self.rest().chars().take_while(char::is_ascii_digit).count();
        if len == 0 {
            return Err(self.err("expected integer exponent"));
        }
        let e: i32 = self.rest()[..len].parse().map_err(|_| self.err("exponent too large"))?;
        self.pos += len;
        base.powi(if neg { -e } else { e })
    }

    fn atom(&mut self) -> Result<RationalFunction, RationalError> {
        self.skip_ws();
        if self.eat('(') {
            let inner = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(inner);
        }
        if self.rest().starts_with(self.var)
            && !self.rest()[self.var.len()..].starts_with(|c: char| c.is_alphanumeric() || c == '_')
        {
            self.pos += self.var.len();
            return Ok(RationalFunction::x());
        }
        let len = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit() || *c == '.')
            .count();
        if len == 0 {
            return Err(self.err("expected number, variable or '('"));
        }
        let mut value = decimal(&self.rest()[..len]).ok_or_else(|| self.err("malformed number"))?;
        self.pos += len;
        // An immediately following `/digits` belongs to the literal.
        if self.rest().starts_with('/') && self.rest()[1..].starts_with(|c: char| c.is_ascii_digit()) {
            let dl = self.rest()[1..].chars().take_while(char::is_ascii_digit).count();
            let d = decimal(&self.rest()[1..1 + dl]).ok_or_else(|| self.err("malformed number"))?;
            if d.is_zero() {
                return Err(RationalError::DivisionByZero);
            }
            value /= d;
            self.pos += 1 + dl;
        }
        if value.is_one() {
            return Ok(RationalFunction::one());
        }
        Ok(RationalFunction::constant(value))
    }
}
