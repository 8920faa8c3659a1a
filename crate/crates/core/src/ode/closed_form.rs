use super::{OdeError, SkrParams, Taylor2};

/// A profile `φ(τ)` with its first two derivatives.
pub trait PhiProfile: Send + Sync {
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError>;
}

/// `φ ≡ value`
#[derive(Clone, Copy, Debug)]
pub struct ConstantPhi(pub f64);

impl PhiProfile for ConstantPhi {
    fn eval(&self, _tau: f64) -> Result<Taylor2, OdeError> {
        Ok(Taylor2::constant(self.0))
    }
}

/// Sign pattern of `(τ, τ − c, τ − 2c)` fixed on the working interval when
/// `a` is not an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BranchSigns {
    pub tau: i8,
    pub tau_minus_c: i8,
    pub tau_minus_2c: i8,
}

/// `φ = C1 + C2 (τ − 2c)^{1−a} (τ − c)^{−m} τ^{2m−1+a}`.
///
/// For integer `a` the powers are ordinary signed powers. Otherwise they are
/// taken of absolute values, which is again a solution on any interval where
/// `τ` and `τ − 2c` keep their signs; that sign pattern is fixed at
/// construction and evaluation outside it fails.
#[derive(Clone, Debug)]
pub struct PhiSolution {
    c1: f64,
    c2: f64,
    c: f64,
    exponents: [f64; 3],
    signs: Option<BranchSigns>,
}

fn sgn(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

impl PhiSolution {
    /// Closed form on the branch containing `reference` (any point of the
    /// intended working interval).
    pub fn new(p: &SkrParams, reference: f64) -> Result<Self, OdeError> {
        let a = p.a_f64();
        let m = p.m as f64;
        let c = p.c_f64();
        let exponents = [1.0 - a, -m, 2.0 * m - 1.0 + a];
        let signs = if p.integer_a().is_some() {
            None
        } else {
            let s = BranchSigns {
                tau: sgn(reference),
                tau_minus_c: sgn(reference - c),
                tau_minus_2c: sgn(reference - 2.0 * c),
            };
            if s.tau == 0 || s.tau_minus_2c == 0 || s.tau_minus_c == 0 {
                return Err(OdeError::Branch(format!(
                    "reference point tau = {reference} lies on a branch point"
                )));
            }
            Some(s)
        };
        Ok(Self {
            c1: p.c1.to_f64(),
            c2: p.c2.to_f64(),
            c,
            exponents,
            signs,
        })
    }

    pub fn branch(&self) -> Option<BranchSigns> {
        self.signs
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `(τ − 2c)^{1−a} (τ − c)^{−m} τ^{2m−1+a}` and its derivatives.
    pub fn homogeneous(&self, tau: f64) -> Result<Taylor2, OdeError> {
        if let Some(s) = self.signs {
            if sgn(tau) != s.tau || sgn(tau - 2.0 * self.c) != s.tau_minus_2c {
                return Err(OdeError::Branch(format!(
                    "tau = {tau} is outside the real branch fixed for non-integer a"
                )));
            }
        }
        let bases = [tau - 2.0 * self.c, tau - self.c, tau];
        let mut h = Taylor2::constant(1.0);
        for (x, e) in bases.into_iter().zip(self.exponents) {
            if e == 0.0 {
                continue;
            }
            if x == 0.0 {
                return Err(OdeError::Pole {
                    at: "tau in {0, c, 2c}".into(),
                    tau,
                });
            }
            h = h * Taylor2::pow_base(x, e);
        }
        Ok(h)
    }

    /// Samples `φ` at `samples` points of `[lo, hi]` and fails unless it keeps
    /// the sign `sign`.
    pub fn check_sign(&self, lo: f64, hi: f64, samples: usize, sign: i8) -> Result<(), OdeError> {
        for i in 0..=samples {
            let tau = lo + (hi - lo) * i as f64 / samples as f64;
            let v = self.eval(tau)?.v;
            if sgn(v) != sign {
                return Err(OdeError::SignViolation { tau, value: v });
            }
        }
        Ok(())
    }
}

impl PhiProfile for PhiSolution {
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError> {
        if self.c2 == 0.0 {
            return Ok(Taylor2::constant(self.c1));
        }
        let h = self.homogeneous(tau)?;
        Ok(h * self.c2 + Taylor2::constant(self.c1))
    }
}

/// `φ` given by closures for value and derivatives.
pub struct FnPhi<F>(pub F);

impl<F> PhiProfile for FnPhi<F>
where
    F: Fn(f64) -> Taylor2 + Send + Sync,
{
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError> {
        Ok((self.0)(tau))
    }
}

impl<T: PhiProfile + ?Sized> PhiProfile for std::sync::Arc<T> {
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError> {
        (**self).eval(tau)
    }
}
