use num_rational::BigRational;

use crate::rational::Number;

use super::OdeError;

/// Scalar data of the φ equations.
///
/// `n = 2m` is always derived. `k` is the constant in `f = 1/τ + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkrParams {
    pub m: u32,
    pub a: Number,
    pub c: Number,
    pub k: Number,
    pub kappa: Number,
    pub lambda: Number,
    pub c1: Number,
    pub c2: Number,
    pub b: Number,
    pub sign_phi: i8,
}

/// Exact copies of the parameters that enter the symbolic systems.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactParams {
    pub m: BigRational,
    pub a: BigRational,
    pub c: BigRational,
    pub k: BigRational,
    pub kappa: BigRational,
    pub lambda: BigRational,
    pub sign: BigRational,
}

/// Tolerance for the branch identities when some input is a float.
pub const BRANCH_TOL: f64 = 1e-12;

impl SkrParams {
    /// General parameters with `κ = λ = C1 = C2 = 0`, `b = 1` and `sgn φ = +1`.
    pub fn general(m: u32, a: Number, c: Number, k: Number) -> Self {
        Self {
            m,
            a,
            c,
            k,
            kappa: Number::int(0),
            lambda: Number::int(0),
            c1: Number::int(0),
            c2: Number::int(0),
            b: Number::int(1),
            sign_phi: 1,
        }
    }

    /// The solution family: `k = −1/(2c)`, `C1 = sgn(φ)·κ/(2m)` and
    /// `λ = 2c(a + 2m − 1)·C1`, which makes the constant solutions of the two
    /// equations coincide.
    pub fn solution_branch(
        m: u32,
        a: Number,
        c: Number,
        kappa: Number,
        c2: Number,
        sign_phi: i8,
    ) -> Result<Self, OdeError> {
        if c.is_zero() {
            return Err(OdeError::InvalidParams("the solution family needs c != 0".into()));
        }
        let two_c = Number::int(2).mul(&c);
        let k = Number::int(-1).div(&two_c);
        let c1 = Number::int(sign_phi as i64).mul(&kappa).div(&Number::int(2 * m as i64));
        let lambda = two_c.mul(&a.add(&Number::int(2 * m as i64 - 1))).mul(&c1);
        let p = Self {
            m,
            a,
            c,
            k,
            kappa,
            lambda,
            c1,
            c2,
            b: Number::int(1),
            sign_phi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_b(mut self, b: Number) -> Self {
        self.b = b;
        self
    }

    pub fn n(&self) -> u32 {
        2 * self.m
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if self.m < 2 {
            return Err(OdeError::InvalidParams(format!("m = {} must be at least 2", self.m)));
        }
        if !self.a.is_positive() {
            return Err(OdeError::InvalidParams(format!("a = {} must be positive", self.a)));
        }
        if self.b.is_zero() {
            return Err(OdeError::InvalidParams("b must be nonzero".into()));
        }
        if self.sign_phi != 1 && self.sign_phi != -1 {
            return Err(OdeError::InvalidParams(format!(
                "sign_phi = {} must be +1 or -1",
                self.sign_phi
            )));
        }
        for (name, v) in self.named() {
            if !v.to_f64().is_finite() {
                return Err(OdeError::InvalidParams(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// `2ck + 1`
    pub fn branch_defect(&self) -> Number {
        Number::int(2).mul(&self.c).mul(&self.k).add(&Number::int(1))
    }

    /// `a(2ck + 1)`, whose vanishing is necessary for nonzero solutions.
    pub fn obstruction(&self) -> Number {
        self.a.mul(&self.branch_defect())
    }

    /// Checks the solution-family identities: `c ≠ 0`, `k = −1/(2c)`,
    /// `C1 = sgn(φ)κ/(2m)` and `C1 = λ/(2c(a + 2m − 1))`; exact for exact
    /// inputs, otherwise to [`BRANCH_TOL`].
    pub fn validate_solution_branch(&self) -> Result<(), OdeError> {
        self.validate()?;
        if self.c.is_zero() {
            return Err(OdeError::NotSolutionBranch("c = 0".into()));
        }
        let defect = self.branch_defect();
        if !defect.approx_eq(&Number::int(0), BRANCH_TOL) {
            return Err(OdeError::NotSolutionBranch(format!(
                "2ck + 1 = {defect} with a = {}, so a(2ck + 1) = {} != 0 and the only solution of the system is zero",
                self.a,
                self.obstruction()
            )));
        }
        let two_m = Number::int(2 * self.m as i64);
        let c1_kappa = Number::int(self.sign_phi as i64).mul(&self.kappa).div(&two_m);
        if !self.c1.approx_eq(&c1_kappa, BRANCH_TOL) {
            return Err(OdeError::NotSolutionBranch(format!(
                "C1 = {} but sgn(phi)*kappa/(2m) = {c1_kappa}",
                self.c1
            )));
        }
        let denom = Number::int(2)
            .mul(&self.c)
            .mul(&self.a.add(&Number::int(2 * self.m as i64 - 1)));
        let lambda_c1 = denom.mul(&self.c1);
        if !self.lambda.approx_eq(&lambda_c1, BRANCH_TOL) {
            return Err(OdeError::NotSolutionBranch(format!(
                "lambda = {} but 2c(a + 2m - 1)C1 = {lambda_c1}",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, &Number); 8] {
        [
            ("a", &self.a),
            ("c", &self.c),
            ("k", &self.k),
            ("kappa", &self.kappa),
            ("lambda", &self.lambda),
            ("C1", &self.c1),
            ("C2", &self.c2),
            ("b", &self.b),
        ]
    }

    /// The exact values needed by the symbolic systems; fails if any of
    /// `a, c, k, κ, λ` is a float.
    pub fn exact(&self) -> Result<ExactParams, OdeError> {
        let get = |name: &str, v: &Number| v.exact().cloned().ok_or_else(|| OdeError::NotExact(name.to_string()));
        Ok(ExactParams {
            m: BigRational::from_integer(self.m.into()),
            a: get("a", &self.a)?,
            c: get("c", &self.c)?,
            k: get("k", &self.k)?,
            kappa: get("kappa", &self.kappa)?,
            lambda: get("lambda", &self.lambda)?,
            sign: BigRational::from_integer(self.sign_phi.into()),
        })
    }

    pub fn a_f64(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn c_f64(&self) -> f64 {
        self.c.to_f64()
    }

    pub fn k_f64(&self) -> f64 {
        self.k.to_f64()
    }

    /// Integer value of `a`, if it is one.
    pub fn integer_a(&self) -> Option<i64> {
        self.a.as_integer()
    }
}
