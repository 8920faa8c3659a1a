//! Second-order truncated Taylor arithmetic in several variables.
//!
//! A [`Jet2`] carries a value, its gradient and its (symmetric) Hessian with
//! respect to up to [`MAX_DIM`] chart coordinates. Arithmetic propagates all
//! three exactly by the product and chain rules, so metric components written
//! as ordinary expressions over jets deliver first and second partial
//! derivatives to machine precision.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest supported chart dimension (complex dimension 5).
pub const MAX_DIM: usize = 10;
const HESS_LEN: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline(always)]
fn hidx(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    n: u8,
    val: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; HESS_LEN],
}

impl Jet2 {
    pub fn constant(val: f64) -> Self {
        Self {
            n: 0,
            val,
            grad: [0.0; MAX_DIM],
            hess: [0.0; HESS_LEN],
        }
    }

    /// The coordinate function `x^i` in an `n`-dimensional chart, at value `val`.
    pub fn variable(val: f64, i: usize, n: usize) -> Self {
        assert!(i < n && n <= MAX_DIM, "variable index {i} outside dimension {n}");
        let mut j = Self::constant(val);
        j.n = n as u8;
        j.grad[i] = 1.0;
        j
    }

    /// Seeds one variable per coordinate.
    pub fn seed(coords: &[f64]) -> Vec<Self> {
        let n = coords.len();
        coords
            .iter()
            .enumerate()
            .map(|(i, &x)| Self::variable(x, i, n))
            .collect()
    }

    /// Builds a jet from explicit value, gradient and full Hessian rows.
    pub fn from_parts(val: f64, grad: &[f64], hess: &[Vec<f64>]) -> Self {
        let n = grad.len();
        assert!(n <= MAX_DIM);
        let mut j = Self::constant(val);
        j.n = n as u8;
        j.grad[..n].copy_from_slice(grad);
        for b in 0..n {
            for a in 0..=b {
                j.hess[hidx(a, b)] = hess[a][b];
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn value(&self) -> f64 {
        self.val
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn dd(&self, i: usize, j: usize) -> f64 {
        self.hess[hidx(i, j)]
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad[..self.dim()]
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        self.val.is_finite()
            && self.grad[..n].iter().all(|x| x.is_finite())
            && self.hess[..n * (n + 1) / 2].iter().all(|x| x.is_finite())
    }

    /// Applies a scalar function given its value and first two derivatives at
    /// `self.value()`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.dim();
        let mut out = Self::constant(f0);
        out.n = self.n;
        for i in 0..n {
            out.grad[i] = f1 * self.grad[i];
        }
        for b in 0..n {
            for a in 0..=b {
                let k = hidx(a, b);
                out.hess[k] = f1 * self.hess[k] + f2 * self.grad[a] * self.grad[b];
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let inv = 1.0 / self.val;
        self.compose(inv, -inv * inv, 2.0 * inv * inv * inv)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.val.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * self.val))
    }

    pub fn exp(&self) -> Self {
        let e = self.val.exp();
        self.compose(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let inv = 1.0 / self.val;
        self.compose(self.val.ln(), inv, -inv * inv)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn powi(&self, e: i32) -> Self {
        let x = self.val;
        let ef = e as f64;
        let d2 = if e == 0 || e == 1 {
            0.0
        } else {
            ef * (ef - 1.0) * x.powi(e - 2)
        };
        let d1 = if e == 0 { 0.0 } else { ef * x.powi(e - 1) };
        self.compose(x.powi(e), d1, d2)
    }

    /// Real power; requires a positive value unless `e` is an integer.
    pub fn powf(&self, e: f64) -> Self {
        let x = self.val;
        self.compose(x.powf(e), e * x.powf(e - 1.0), e * (e - 1.0) * x.powf(e - 2.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let n = self.dim();
        let mut out = *self;
        out.val *= s;
        for g in &mut out.grad[..n] {
            *g *= s;
        }
        for h in &mut out.hess[..n * (n + 1) / 2] {
            *h *= s;
        }
        out
    }
}

impl Default for Jet2 {
    fn default() -> Self {
        Self::constant(0.0)
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Self::constant(v)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    #[inline]
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self += rhs;
        self
    }
}

impl AddAssign for Jet2 {
    #[inline]
    fn add_assign(&mut self, rhs: Jet2) {
        let n = self.dim().max(rhs.dim());
        self.n = n as u8;
        self.val += rhs.val;
        for i in 0..n {
            self.grad[i] += rhs.grad[i];
        }
        for k in 0..n * (n + 1) / 2 {
            self.hess[k] += rhs.hess[k];
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    #[inline]
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Jet2) {
        let n = self.dim().max(rhs.dim());
        self.n = n as u8;
        self.val -= rhs.val;
        for i in 0..n {
            self.grad[i] -= rhs.grad[i];
        }
        for k in 0..n * (n + 1) / 2 {
            self.hess[k] -= rhs.hess[k];
        }
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    #[inline]
    fn mul(self, rhs: Jet2) -> Jet2 {
        let n = self.dim().max(rhs.dim());
        let mut out = Jet2::constant(self.val * rhs.val);
        out.n = n as u8;
        for i in 0..n {
            out.grad[i] = self.val * rhs.grad[i] + rhs.val * self.grad[i];
        }
        for b in 0..n {
            for a in 0..=b {
                let k = hidx(a, b);
                out.hess[k] = self.val * rhs.hess[k]
                    + rhs.val * self.hess[k]
                    + self.grad[a] * rhs.grad[b]
                    + self.grad[b] * rhs.grad[a];
            }
        }
        out
    }
}

impl MulAssign for Jet2 {
    fn mul_assign(&mut self, rhs: Jet2) {
        *self = *self * rhs;
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[inline]
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.val += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: f64) -> Jet2 {
        self.val -= rhs;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, rhs: f64) -> Jet2 {
        self.scale(1.0 / rhs)
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        rhs + self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        -rhs + self
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs.scale(self)
    }
}

impl Div<Jet2> for f64 {
    type Output = Jet2;
    fn div(self, rhs: Jet2) -> Jet2 {
        rhs.recip().scale(self)
    }
}

impl std::iter::Sum for Jet2 {
    fn sum<I: Iterator<Item = Jet2>>(iter: I) -> Jet2 {
        iter.fold(Jet2::constant(0.0), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn product_rule_two_vars() {
        let v = Jet2::seed(&[1.5, -0.5]);
        // f = x^2 y + sin(x y)
        let (x, y) = (v[0], v[1]);
        let f = x * x * y + (x * y).sin();
        let (xv, yv) = (1.5f64, -0.5f64);
        let c = (xv * yv).cos();
        let s = (xv * yv).sin();
        assert!(close(f.value(), xv * xv * yv + s));
        assert!(close(f.d(0), 2.0 * xv * yv + yv * c));
        assert!(close(f.d(1), xv * xv + xv * c));
        assert!(close(f.dd(0, 0), 2.0 * yv - yv * yv * s));
        assert!(close(f.dd(0, 1), 2.0 * xv + c - xv * yv * s));
        assert!(close(f.dd(1, 0), f.dd(0, 1)));
        assert!(close(f.dd(1, 1), -xv * xv * s));
    }

    #[test]
    fn elementary_functions() {
        let x = Jet2::variable(0.7, 0, 1);
        let e = x.exp().ln();
        assert!(close(e.value(), 0.7) && close(e.d(0), 1.0) && e.dd(0, 0).abs() < 1e-14);
        let s = x.sqrt() * x.sqrt();
        assert!(close(s.d(0), 1.0) && s.dd(0, 0).abs() < 1e-14);
        let p = x.powf(3.5);
        assert!(close(p.dd(0, 0), 3.5 * 2.5 * 0.7f64.powf(1.5)));
        let q = x.powi(-2);
        assert!(close(q.d(0), -2.0 / 0.7f64.powi(3)));
        let r = (1.0 / x) * x;
        assert!(close(r.value(), 1.0) && r.d(0).abs() < 1e-14);
    }

    #[test]
    fn constants_broadcast() {
        let x = Jet2::variable(2.0, 1, 3);
        let c = Jet2::constant(5.0);
        let f = c * x + 1.0;
        assert_eq!(f.dim(), 3);
        assert_eq!(f.d(1), 5.0);
        assert_eq!(f.d(0), 0.0);
    }
}
