use std::ops::{Add, Mul};

use super::{OdeError, SkrParams};

/// Value and first two derivatives of a function of one variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Taylor2 {
    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub fn constant(v: f64) -> Self {
        Self::new(v, 0.0, 0.0)
    }

    pub fn variable(x: f64) -> Self {
        Self::new(x, 1.0, 0.0)
    }

    /// `x^e`, taken as `sgn(x)^e |x|^e` for integer `e` and as `|x|^e`
    /// otherwise. Both satisfy `(x^e)' = e x^e / x` wherever `x ≠ 0`.
    pub fn pow_base(x: f64, e: f64) -> Self {
        if e == 0.0 {
            return Self::constant(1.0);
        }
        if e.fract() == 0.0 && e.abs() < 64.0 {
            let i = e as i32;
            let d1 = e * x.powi(i - 1);
            let d2 = if i == 1 { 0.0 } else { e * (e - 1.0) * x.powi(i - 2) };
            return Self::new(x.powi(i), d1, d2);
        }
        let v = x.abs().powf(e);
        Self::new(v, e * v / x, e * (e - 1.0) * v / (x * x))
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite()
    }
}

impl Add for Taylor2 {
    type Output = Taylor2;
    fn add(self, r: Taylor2) -> Taylor2 {
        Taylor2::new(self.v + r.v, self.d1 + r.d1, self.d2 + r.d2)
    }
}

impl Mul for Taylor2 {
    type Output = Taylor2;
    fn mul(self, r: Taylor2) -> Taylor2 {
        Taylor2::new(
            self.v * r.v,
            self.v * r.d1 + self.d1 * r.v,
            self.v * r.d2 + 2.0 * self.d1 * r.d1 + self.d2 * r.v,
        )
    }
}

impl Mul<f64> for Taylor2 {
    type Output = Taylor2;
    fn mul(self, s: f64) -> Taylor2 {
        Taylor2::new(self.v * s, self.d1 * s, self.d2 * s)
    }
}

/// `u = −a log f`
pub fn u_from_f(f: f64, a: f64) -> Result<f64, OdeError> {
    if !(f > 0.0) {
        return Err(OdeError::Domain(format!("u = -a log f needs f > 0, got {f}")));
    }
    Ok(-a * f.ln())
}

/// `f = exp(−u/a)`
pub fn f_from_u(u: f64, a: f64) -> f64 {
    (-u / a).exp()
}

fn ktau_factor(p: &SkrParams, tau: f64) -> Result<f64, OdeError> {
    if tau == 0.0 {
        return Err(OdeError::Pole {
            at: "tau = 0".into(),
            tau,
        });
    }
    let one_k = 1.0 + p.k_f64() * tau;
    if one_k == 0.0 {
        return Err(OdeError::Pole {
            at: "1 + k*tau = 0".into(),
            tau,
        });
    }
    Ok(one_k)
}

/// `α = [n − 2 + a/(1 + kτ)]/τ`
pub fn alpha(p: &SkrParams, tau: f64) -> Result<f64, OdeError> {
    let one_k = ktau_factor(p, tau)?;
    Ok((p.n() as f64 - 2.0 + p.a_f64() / one_k) / tau)
}

/// `dα/dτ`
pub fn alpha_derivative(p: &SkrParams, tau: f64) -> Result<f64, OdeError> {
    let one_k = ktau_factor(p, tau)?;
    let (a, k, n) = (p.a_f64(), p.k_f64(), p.n() as f64);
    Ok(-(n - 2.0 + a / one_k) / (tau * tau) - a * k / (tau * one_k * one_k))
}

/// Coefficients `(α, γ)` of `α∇dτ + r = γg` for `f = 1/τ + k`:
/// `γ = λτ⁻² − τ⁻¹Δτ + [a/(1 + kτ) + n − 1]τ⁻²Q`.
pub fn rh_coefficients(p: &SkrParams, tau: f64, q: f64, lap_tau: f64) -> Result<(f64, f64), OdeError> {
    let one_k = ktau_factor(p, tau)?;
    let (a, n, lam) = (p.a_f64(), p.n() as f64, p.lambda.to_f64());
    let al = (n - 2.0 + a / one_k) / tau;
    let ga = lam / (tau * tau) - lap_tau / tau + (a / one_k + n - 1.0) * q / (tau * tau);
    Ok((al, ga))
}

/// `(a/f)(f″ + 2τ⁻¹f′)`, the coefficient of `dτ⊗dτ` in the conformal
/// expansion; it vanishes exactly when `f` is affine in `1/τ`.
pub fn dtau_dtau_coefficient(a: f64, f: Taylor2, tau: f64) -> Result<f64, OdeError> {
    if tau == 0.0 {
        return Err(OdeError::Pole {
            at: "tau = 0".into(),
            tau,
        });
    }
    if f.v == 0.0 {
        return Err(OdeError::Pole {
            at: "f = 0".into(),
            tau,
        });
    }
    Ok((a / f.v) * (f.d2 + 2.0 * f.d1 / tau))
}

/// Roots of `α dα` in `τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegeneracyRoots {
    pub roots: Vec<f64>,
    /// `k = 0`: the formulas do not apply and `α dα` has no finite zeros.
    pub k_zero: bool,
}

/// The values `τ = (2 − n − a)/((n − 2)k)` (zeros of α) and
/// `τ = (−(n − 2 + a) ± √(a(n + a − 2)))/((n − 2)k)` (zeros of dα).
pub fn alpha_degeneracy_roots(p: &SkrParams) -> DegeneracyRoots {
    let (n, a, k) = (p.n() as f64, p.a_f64(), p.k_f64());
    if k == 0.0 {
        return DegeneracyRoots {
            roots: Vec::new(),
            k_zero: true,
        };
    }
    let d = (n - 2.0) * k;
    let disc = (a * (n + a - 2.0)).sqrt();
    DegeneracyRoots {
        roots: vec![
            (2.0 - n - a) / d,
            (-(n - 2.0 + a) + disc) / d,
            (-(n - 2.0 + a) - disc) / d,
        ],
        k_zero: false,
    }
}

/// `(τ−c)²φ″ + (τ−c)[m − (τ−c)α]φ′ − mφ + sgn(φ)κ/2`
pub fn mek_residual(p: &SkrParams, phi: Taylor2, alpha: f64, tau: f64) -> f64 {
    let (m, c, kappa) = (p.m as f64, p.c_f64(), p.kappa.to_f64());
    let t = tau - c;
    t * t * phi.d2 + t * (m - t * alpha) * phi.d1 - m * phi.v + p.sign_phi as f64 * kappa / 2.0
}

/// `γ = αφ + (α(τ−c) − (m+1))φ′ − (τ−c)φ″`
pub fn gamma_from_phi(p: &SkrParams, phi: Taylor2, alpha: f64, tau: f64) -> f64 {
    let (m, c) = (p.m as f64, p.c_f64());
    let t = tau - c;
    alpha * phi.v + (alpha * t - (m + 1.0)) * phi.d1 - t * phi.d2
}
