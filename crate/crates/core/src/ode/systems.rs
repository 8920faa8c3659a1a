use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::rational::{Polynomial, RationalError, RationalFunction};

use super::{ExactParams, OdeError, SkrParams, Taylor2};

/// `Aφ″ + Bφ′ + Cφ = D` with rational-function coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOde2 {
    pub a: RationalFunction,
    pub b: RationalFunction,
    pub c: RationalFunction,
    pub d: RationalFunction,
}

/// `φ′ + pφ = q`
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOde1 {
    pub p: RationalFunction,
    pub q: RationalFunction,
}

/// Residual of a linear equation at a point, with the scale used to judge it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub raw: f64,
    /// `|Aφ″| + |Bφ′| + |Cφ| + |D|`
    pub magnitude: f64,
}

impl Residual {
    /// `|raw| / max(1, magnitude)`
    pub fn relative(&self) -> f64 {
        self.raw.abs() / self.magnitude.max(1.0)
    }
}

impl LinearOde2 {
    pub fn new(a: RationalFunction, b: RationalFunction, c: RationalFunction, d: RationalFunction) -> Self {
        Self { a, b, c, d }
    }

    pub fn scale(&self, w: &RationalFunction) -> Self {
        Self::new(w * &self.a, w * &self.b, w * &self.c, w * &self.d)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }

    pub fn residual(&self, phi: Taylor2, tau: f64) -> Result<Residual, RationalError> {
        let terms = [
            self.a.eval_f64(tau)? * phi.d2,
            self.b.eval_f64(tau)? * phi.d1,
            self.c.eval_f64(tau)? * phi.v,
            -self.d.eval_f64(tau)?,
        ];
        Ok(Residual {
            raw: terms.iter().sum(),
            magnitude: terms.iter().map(|t| t.abs()).sum(),
        })
    }

    /// Divides a first-order equation (`A = 0`) by its `φ′` coefficient.
    pub fn normalize_first_order(&self) -> Result<LinearOde1, OdeError> {
        if !self.a.is_zero() {
            return Err(OdeError::NotFirstOrder);
        }
        if self.b.is_zero() {
            return Err(OdeError::LeadingCoefficientZero);
        }
        Ok(LinearOde1 {
            p: self.c.checked_div(&self.b)?,
            q: self.d.checked_div(&self.b)?,
        })
    }

    pub fn render(&self, var: &str) -> [String; 4] {
        [
            self.a.render(var),
            self.b.render(var),
            self.c.render(var),
            self.d.render(var),
        ]
    }
}

impl LinearOde1 {
    pub fn residual(&self, phi: Taylor2, tau: f64) -> Result<Residual, RationalError> {
        let terms = [phi.d1, self.p.eval_f64(tau)? * phi.v, -self.q.eval_f64(tau)?];
        Ok(Residual {
            raw: terms.iter().sum(),
            magnitude: terms.iter().map(|t| t.abs()).sum(),
        })
    }
}

fn poly(coeffs: Vec<BigRational>) -> RationalFunction {
    Polynomial::from_coeffs(coeffs).into()
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn t() -> RationalFunction {
    RationalFunction::x()
}

fn k(v: &BigRational) -> RationalFunction {
    RationalFunction::constant(v.clone())
}

/// `τ − r`
fn lin(r: &BigRational) -> RationalFunction {
    RationalFunction::linear(r)
}

/// The two equations for φ obtained from the MEK equation multiplied by
/// `τ(1 + kτ)` and from equating the two expressions for γ, multiplied by
/// `τ²(1 + kτ)`.
pub fn phi_system(p: &SkrParams) -> Result<(LinearOde2, LinearOde2), OdeError> {
    Ok(phi_system_exact(&p.exact()?))
}

pub fn phi_system_exact(e: &ExactParams) -> (LinearOde2, LinearOde2) {
    let ExactParams {
        m,
        a,
        c,
        k: kk,
        kappa,
        lambda,
        sign,
    } = e;
    let one = BigRational::one();
    let two = q(2);
    let tc = lin(c);
    let one_kt = poly(vec![one.clone(), kk.clone()]);

    let a1 = &(&t() * &(&tc * &tc)) * &one_kt;
    let b1 = poly(vec![
        -(&two * m - &two + a) * c * c,
        (&two * a + q(3) * m - q(4)) * c - &two * (m - &one) * kk * c * c,
        &two - m - a + (q(3) * m - q(4)) * kk * c,
        (&two - m) * kk,
    ]);
    let c1 = poly(vec![q(0), -m.clone(), -(m * kk)]);
    let d1 = (&t() * &one_kt).scale(&(-(sign * kappa) / &two));

    let a2 = &(&(&t() * &t()) * &tc) * &one_kt;
    let b2 = poly(vec![
        q(0),
        c * (a + &two * m),
        &one - m - a + &two * m * kk * c,
        (&one - m) * kk,
    ]);
    let c2 = poly(vec![
        -(&two * c * (a + &two * m - &one)),
        a - &two * c * (&two * m - &one) * kk,
    ]);
    let d2 = one_kt.scale(&-lambda.clone());
    (LinearOde2::new(a1, b1, c1, d1), LinearOde2::new(a2, b2, c2, d2))
}

/// The same two equations on the solution family `k = −1/(2c)`, cleared of
/// denominators (they equal `2c` times [`phi_system`] there).
pub fn solsys_system(p: &SkrParams) -> Result<(LinearOde2, LinearOde2), OdeError> {
    let e = p.exact()?;
    if e.c.is_zero() {
        return Err(OdeError::InvalidParams(
            "the solution-family system needs c != 0".into(),
        ));
    }
    let ExactParams {
        m,
        a,
        c,
        kappa,
        lambda,
        sign,
        ..
    } = &e;
    let two = q(2);
    let tc = lin(c);
    let t2c = lin(&(&two * c));
    let two_c_minus_t = -&t2c;
    let c2_ = c * c;
    let c3_ = &c2_ * c;

    let a1 = &(&t() * &(&tc * &tc)) * &two_c_minus_t;
    let b1 = poly(vec![
        -(&two * &c3_ * (&two * m - &two + a)),
        &two * &c2_ * (&two * a + q(4) * m - q(5)),
        c * (q(8) - q(5) * m - &two * a),
        m - &two,
    ]);
    let c1 = (&t() * &t2c).scale(m);
    let d1 = (&t() * &t2c).scale(&(sign * kappa / &two));

    let a2 = &(&(&t() * &t()) * &tc) * &two_c_minus_t;
    let b2 = poly(vec![
        q(0),
        &two * &c2_ * (a + &two * m),
        &two * c * (q(1) - &two * m - a),
        m - q(1),
    ]);
    let c2 = t2c.scale(&(&two * c * (a + &two * m - q(1))));
    let d2 = t2c.scale(lambda);
    Ok((LinearOde2::new(a1, b1, c1, d1), LinearOde2::new(a2, b2, c2, d2)))
}

/// First-order combination `τ·(1) − (τ − c)·(2)`, in which the `φ″` terms
/// cancel: `raw` before and `normalized` after division by the `φ′`
/// coefficient `τ(τ − c)(τ − 2c)(1 + kτ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub raw: LinearOde2,
    pub normalized: LinearOde1,
}

pub fn first_order_reduction(sys: &(LinearOde2, LinearOde2), p: &SkrParams) -> Result<Reduction, OdeError> {
    let c = p.exact()?.c;
    let raw = sys.0.scale(&t()).add(&sys.1.scale(&-lin(&c)));
    let normalized = raw.normalize_first_order()?;
    Ok(Reduction { raw, normalized })
}

/// `X = A(p² − p′) − Bp + C` and `Y = D − A(q′ − pq) − Bq` for the pair
/// `φ′ + pφ = q`, `Aφ″ + Bφ′ + Cφ = D`. Any common solution satisfies
/// `Xφ = Y`.
pub fn elimination_quantities(ode1: &LinearOde1, ode2: &LinearOde2) -> (RationalFunction, RationalFunction) {
    let LinearOde1 { p, q } = ode1;
    let dp = p.derivative();
    let dq = q.derivative();
    let x = &(&(&ode2.a * &(&(p * p) - &dp)) - &(&ode2.b * p)) + &ode2.c;
    let y = &(&ode2.d - &(&ode2.a * &(&dq - &(p * q)))) - &(&ode2.b * q);
    (x, y)
}

/// The only candidate `φ = Y/X`, when `X` is not identically zero.
pub fn elimination_quotient(ode1: &LinearOde1, ode2: &LinearOde2) -> Option<RationalFunction> {
    let (x, y) = elimination_quantities(ode1, ode2);
    y.checked_div(&x).ok()
}

/// `a(τ − c)²(2ck + 1)/((τ − 2c)(kτ + 1))`
pub fn expected_x(e: &ExactParams) -> RationalFunction {
    let two = q(2);
    let tc = lin(&e.c);
    let num = (&tc * &tc).scale(&(&e.a * (&two * &e.c * &e.k + q(1))));
    let den = &lin(&(&two * &e.c)) * &poly(vec![q(1), e.k.clone()]);
    num.checked_div(&den).expect("(τ - 2c)(kτ + 1) is a nonzero polynomial")
}

/// Outcome of the two-equation elimination.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `X ≢ 0` and `Y ≡ 0`: every common solution vanishes.
    ForcedZero,
    /// `X ≡ 0`: no obstruction; nonzero (constant) solutions are possible.
    ConstantsAdmitted,
    /// `X ≢ 0`, `Y ≢ 0`: at most the single candidate `Y/X`.
    UniqueCandidate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub verdict: Verdict,
    pub x: RationalFunction,
    pub y: RationalFunction,
    pub quotient: Option<RationalFunction>,
}

pub fn decide(ode1: &LinearOde1, ode2: &LinearOde2) -> Decision {
    let (x, y) = elimination_quantities(ode1, ode2);
    let quotient = y.checked_div(&x).ok();
    let verdict = if x.is_zero() {
        Verdict::ConstantsAdmitted
    } else if y.is_zero() {
        Verdict::ForcedZero
    } else {
        Verdict::UniqueCandidate
    };
    Decision {
        verdict,
        x,
        y,
        quotient,
    }
}

/// Runs the elimination on the system and its first-order reduction; the
/// verdict is `ForcedZero` exactly when `a(2ck + 1) ≠ 0`.
pub fn nonexistence_decision(p: &SkrParams) -> Result<Decision, OdeError> {
    let sys = phi_system(p)?;
    let red = first_order_reduction(&sys, p)?;
    Ok(decide(&red.normalized, &sys.0))
}

/// The system for a Kähler quasi-Einstein pair written in the variable `f`,
/// and its first-order combination `(first) + (f − c)(second)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FSystem {
    pub first: LinearOde2,
    pub second: LinearOde2,
    pub reduction: LinearOde2,
    pub reduced: LinearOde1,
}

pub fn f_system(
    m: &BigRational,
    a: &BigRational,
    c: &BigRational,
    kappa: &BigRational,
    lambda: &BigRational,
    sign: i8,
) -> Result<FSystem, OdeError> {
    let f = t();
    let fc = lin(c);
    let s = q(sign as i64);
    let first = LinearOde2::new(
        &f * &(&fc * &fc),
        &fc * &(&f.scale(m) + &fc.scale(a)),
        f.scale(&-m.clone()),
        f.scale(&(-(&s * kappa) / q(2))),
    );
    let second = LinearOde2::new(
        -(&f * &fc),
        -(&fc.scale(a) + &f.scale(&(m + q(1)))),
        k(&-a.clone()),
        f.scale(lambda),
    );
    FSystem::from_equations(first, second, c)
}

impl FSystem {
    /// Forms the first-order combination of two given equations, which must
    /// cancel the `φ″` terms.
    pub fn from_equations(first: LinearOde2, second: LinearOde2, c: &BigRational) -> Result<Self, OdeError> {
        let reduction = first.add(&second.scale(&lin(c)));
        let reduced = reduction.normalize_first_order()?;
        Ok(FSystem {
            first,
            second,
            reduction,
            reduced,
        })
    }

    /// Elimination on the pair (reduction, second equation).
    pub fn decide(&self) -> Decision {
        decide(&self.reduced, &self.second)
    }
}

/// `−a(f − c)/f`
pub fn expected_f_system_x(a: &BigRational, c: &BigRational) -> RationalFunction {
    lin(c)
        .scale(&-a.clone())
        .checked_div(&t())
        .expect("f is a nonzero polynomial")
}

/// `(a − 1)/(τ − 2c) + m/(τ − c) + (1 − a − 2m)/τ`, the logarithmic
/// derivative of the homogeneous solution with the sign reversed.
pub fn expected_p_solution_branch(m: &BigRational, a: &BigRational, c: &BigRational) -> RationalFunction {
    let one = q(1);
    let inv = |r: &BigRational| lin(r).recip().expect("linear factor is nonzero");
    &(&inv(&(q(2) * c)).scale(&(a - &one)) + &inv(c).scale(m)) + &inv(&q(0)).scale(&(&one - a - q(2) * m))
}

/// `d/dτ log[(τ − 2c)^{1−a} (τ − c)^{−m} τ^{2m−1+a}]`
pub fn homogeneous_log_derivative(m: &BigRational, a: &BigRational, c: &BigRational) -> RationalFunction {
    let one = q(1);
    let inv = |r: &BigRational| lin(r).recip().expect("linear factor is nonzero");
    &(&inv(&(q(2) * c)).scale(&(&one - a)) + &inv(c).scale(&-m.clone())) + &inv(&q(0)).scale(&(q(2) * m - &one + a))
}
