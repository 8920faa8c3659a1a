use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::geometry::{
    ChartPoint, ComplexStructure, Jet2, LocalGeometry, MetricChart, ScalarField, StandardComplexStructure,
};
use crate::ode::PhiProfile;

use super::{BaseModel, BuildError, WarpProfile};

/// The bundle metric on `(x_1, ..., x_{2(m−1)}, u, v)`, `w = u + iv`:
///
/// `g = 2|τ − c| h + Q(τ)/(b²|w|²) |Dw|²`, `Dw = dw − w(dρ + i d^cρ)`,
///
/// where `log r = log|w| − ρ(x)` and `τ = τ(log r)` from the warp. With the
/// standard complex structure this is Kähler exactly when the curvature
/// multiple is `s = −sgn(τ − c)·b`.
///
/// The fiber coordinate may be rescaled by a constant, `w ↦ e^{−ℓ}w`, which
/// is again a holomorphic chart; [`SkrChart::recentered`] uses this to keep
/// `|w|` near 1 wherever the chart is evaluated.
#[derive(Clone)]
pub struct SkrChart {
    base: BaseModel,
    warp: Arc<WarpProfile>,
    phi: Option<Arc<dyn PhiProfile>>,
    c: f64,
    s: f64,
    sign: f64,
    offset: f64,
    gauge: Option<Gauge>,
    j: StandardComplexStructure,
}

/// Affine part of `ρ` at a base point. Real affine functions are
/// pluriharmonic, so removing it is a holomorphic change of fiber coordinate.
#[derive(Clone, Debug)]
struct Gauge {
    x0: Vec<f64>,
    rho0: f64,
    grad0: Vec<f64>,
}

/// `s = −sgn(τ − c)·b`, the curvature multiple for which the bundle metric is
/// Kähler.
pub fn kahler_curvature_multiple(b: f64, sign_tau_minus_c: f64) -> f64 {
    -sign_tau_minus_c.signum() * b
}

impl SkrChart {
    /// Assembles the chart for an explicit curvature multiple `s`; the warp's
    /// working interval must lie on one side of `c`.
    pub fn assemble(
        base: BaseModel,
        warp: Arc<WarpProfile>,
        phi: Option<Arc<dyn PhiProfile>>,
        c: f64,
        s: f64,
    ) -> Result<Self, BuildError> {
        let (lo, hi) = warp.working_interval();
        let sign = if lo > c {
            1.0
        } else if hi < c {
            -1.0
        } else {
            return Err(BuildError::Config(format!(
                "working interval ({lo}, {hi}) contains c = {c}"
            )));
        };
        let n = base.real_dim() + 2;
        if n > crate::geometry::MAX_DIM {
            return Err(BuildError::Dimension(n));
        }
        Ok(Self {
            base,
            warp,
            phi,
            c,
            s,
            sign,
            offset: 0.0,
            gauge: None,
            j: StandardComplexStructure::new(n),
        })
    }

    pub fn base(&self) -> &BaseModel {
        &self.base
    }

    pub fn warp(&self) -> &Arc<WarpProfile> {
        &self.warp
    }

    pub fn phi(&self) -> Option<&Arc<dyn PhiProfile>> {
        self.phi.as_ref()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `sgn(τ − c)` on the chart.
    pub fn side(&self) -> f64 {
        self.sign
    }

    pub fn complex_structure(&self) -> StandardComplexStructure {
        self.j
    }

    fn base_dim(&self) -> usize {
        self.base.real_dim()
    }

    /// The same metric in a fiber coordinate adapted to the base point `x0`
    /// and level `τ`: the affine part of `ρ` at `x0` is gauged away and `w` is
    /// rescaled so that the fiber block over `x0` is the identity. This keeps
    /// the component matrix well conditioned there.
    pub fn recentered(&self, x0: &[f64], tau: f64) -> Result<Self, BuildError> {
        let d = self.base_dim();
        if x0.len() != d {
            return Err(BuildError::Dimension(x0.len()));
        }
        let seed = Jet2::seed(x0);
        let gauge = Gauge {
            x0: x0.to_vec(),
            rho0: self.base.rho(&seed, self.s).value(),
            grad0: self
                .base
                .rho_gradient(&seed, self.s)
                .iter()
                .map(|j| j.value())
                .collect(),
        };
        let q = self.warp.q_at(tau)?.v;
        let offset = self.warp.logr_of_tau(tau)? - 0.5 * q.ln() + self.warp.b().abs().ln();
        Ok(Self {
            offset,
            gauge: Some(gauge),
            ..self.clone()
        })
    }

    /// `ρ` in this chart's gauge.
    fn rho(&self, x: &[Jet2]) -> Jet2 {
        let rho = self.base.rho(x, self.s);
        match &self.gauge {
            None => rho,
            Some(g) => {
                let lin: Jet2 = x
                    .iter()
                    .zip(&g.x0)
                    .zip(&g.grad0)
                    .map(|((&xi, x0), g0)| (xi - *x0) * *g0)
                    .sum();
                rho - lin - g.rho0
            }
        }
    }

    fn rho_gradient(&self, x: &[Jet2]) -> Vec<Jet2> {
        let mut grad = self.base.rho_gradient(x, self.s);
        if let Some(g) = &self.gauge {
            for (gi, g0) in grad.iter_mut().zip(&g.grad0) {
                *gi = *gi - *g0;
            }
        }
        grad
    }

    /// Fiber rescaling `ℓ` of this chart.
    pub fn fiber_offset(&self) -> f64 {
        self.offset
    }

    /// `log r = ½ log(u² + v²) − ρ(x) + ℓ` as a jet, `ρ` taken in the chart's
    /// gauge.
    pub fn logr(&self, x: &[Jet2]) -> Jet2 {
        let d = self.base_dim();
        let (u, v) = (x[d], x[d + 1]);
        (u * u + v * v).ln() * 0.5 - self.rho(&x[..d]) + self.offset
    }

    /// `τ` as a jet, from `dτ/d log r = Q/b` and `d²τ/d(log r)² = QQ′/b²`.
    /// Returns `None` outside the warp.
    pub fn tau_jet(&self, x: &[Jet2]) -> Option<Jet2> {
        let l = self.logr(x);
        let tau = self.warp.tau_of_logr(l.value()).ok()?;
        let q = self.warp.q_at(tau).ok()?;
        let b = self.warp.b();
        Some(l.compose(tau, q.v / b, q.v * q.d1 / (b * b)))
    }

    /// The chart point over base point `x` with `τ` and fiber angle `theta`.
    pub fn point_at(&self, x: &[f64], tau: f64, theta: f64) -> Result<ChartPoint, BuildError> {
        let d = self.base_dim();
        if x.len() != d {
            return Err(BuildError::Dimension(x.len()));
        }
        let l = self.warp.logr_of_tau(tau)?;
        let rho = self.rho(&Jet2::seed(x)).value();
        let modw = (l + rho - self.offset).exp();
        let mut coords = x.to_vec();
        coords.push(modw * theta.cos());
        coords.push(modw * theta.sin());
        ChartPoint::new(coords).map_err(BuildError::Geometry)
    }

    /// Largest relative deviation of `g` on `H` from `2|τ − c|h` and on `V`
    /// from `Q/(b²|w|²)` times the fiber metric, with `V = span(∇τ, J∇τ)` and
    /// `H = V^⊥` computed numerically, plus the base projection of `V`.
    pub fn block_residual(&self, p: &ChartPoint) -> Result<f64, BuildError> {
        let lg = LocalGeometry::at(self, p)?;
        let x = p.seed();
        let tau = self.tau_jet(&x).ok_or(BuildError::OutsideWarp(f64::NAN))?;
        let g = lg.metric();
        let n = self.dim();
        let d = self.base_dim();
        let grad = lg.gradient(&tau);
        let jm = DMatrix::from_vec(n, n, StandardComplexStructure::matrix(n)).transpose();
        let jgrad = &jm * &grad;
        // g-orthonormal basis of V
        let e1 = &grad / grad.dot(&(g * &grad)).sqrt();
        let mut e2 = &jgrad - &e1 * e1.dot(&(g * &jgrad));
        e2 /= e2.dot(&(g * &e2)).sqrt();
        let proj_v = |y: &DVector<f64>| &e1 * e1.dot(&(g * y)) + &e2 * e2.dot(&(g * y));
        let w2 = p.coords()[d].powi(2) + p.coords()[d + 1].powi(2);
        let tv = tau.value();
        let q = self.warp.q_at(tv)?.v;
        let b = self.warp.b();
        let vert = q / (b * b * w2);
        let horiz = 2.0 * (tv - self.c).abs();
        let h = self.base.metric(&Jet2::seed(&p.coords()[..d]));
        let mut worst = 0.0f64;
        // V lies in the fiber directions.
        for e in [&e1, &e2] {
            let base_part = e.rows(0, d).amax() * vert.sqrt();
            worst = worst.max(base_part);
            let fiber = vert * (e[d] * e[d] + e[d + 1] * e[d + 1]);
            worst = worst.max((fiber - 1.0).abs());
        }
        let lifts: Vec<DVector<f64>> = (0..d)
            .map(|a| {
                let ea = DVector::from_fn(n, |i, _| if i == a { 1.0 } else { 0.0 });
                &ea - proj_v(&ea)
            })
            .collect();
        for a in 0..d {
            for c in 0..d {
                let gh = lifts[a].dot(&(g * &lifts[c]));
                worst = worst.max((gh - horiz * h[a * d + c].value()).abs() / horiz);
            }
        }
        Ok(worst)
    }

    pub fn tau_field(self: &Arc<Self>) -> Arc<dyn ScalarField> {
        Arc::new(TauField(self.clone()))
    }

    /// `f = 1/τ + k`
    pub fn f_field(self: &Arc<Self>, k: f64) -> Arc<dyn ScalarField> {
        Arc::new(FField(self.clone(), k))
    }
}

impl MetricChart for SkrChart {
    fn dim(&self) -> usize {
        self.base_dim() + 2
    }

    fn components(&self, x: &[Jet2]) -> Vec<Jet2> {
        let d = self.base_dim();
        let n = d + 2;
        let nan = vec![Jet2::constant(f64::NAN); n * n];
        let Some(tau) = self.tau_jet(x) else {
            return nan;
        };
        let Ok(qt) = self.warp.q_at(tau.value()) else {
            return nan;
        };
        let b = self.warp.b();
        let q = tau.compose(qt.v, qt.d1, qt.d2);
        let (u, v) = (x[d], x[d + 1]);
        let vert = q / ((u * u + v * v) * (b * b));
        let horiz = (tau - self.c) * (2.0 * self.sign);
        let h = self.base.metric(&x[..d]);
        let grad = self.rho_gradient(&x[..d]);
        // θre = du − Σ(uα_a − vβ_a)dx_a, θim = dv − Σ(vα_a + uβ_a)dx_a with
        // α = dρ and β = d^cρ = (−ρ_y, ρ_x) per complex coordinate.
        let beta: Vec<Jet2> = (0..d)
            .map(|a| if a % 2 == 0 { -grad[a + 1] } else { grad[a - 1] })
            .collect();
        let mut th_re = vec![Jet2::constant(0.0); n];
        let mut th_im = vec![Jet2::constant(0.0); n];
        for a in 0..d {
            th_re[a] = -(u * grad[a] - v * beta[a]);
            th_im[a] = -(v * grad[a] + u * beta[a]);
        }
        th_re[d] = Jet2::constant(1.0);
        th_im[d + 1] = Jet2::constant(1.0);
        let mut g = vec![Jet2::constant(0.0); n * n];
        for i in 0..n {
            for k in i..n {
                let mut val = vert * (th_re[i] * th_re[k] + th_im[i] * th_im[k]);
                if i < d && k < d {
                    val += horiz * h[i * d + k];
                }
                g[i * n + k] = val;
                g[k * n + i] = val;
            }
        }
        g
    }

    fn contains(&self, p: &ChartPoint) -> bool {
        let x = p.coords();
        let d = self.base_dim();
        if x.len() != d + 2 || x[d] == 0.0 && x[d + 1] == 0.0 {
            return false;
        }
        let l = self.logr(&Jet2::seed(x)).value();
        let (lo, hi) = self.warp.logr_range();
        l >= lo && l <= hi
    }

    fn describe(&self) -> String {
        let (lo, hi) = self.warp.working_interval();
        format!(
            "bundle metric over {} C^{} (s = {}, b = {}, c = {}, tau in [{lo:.6}, {hi:.6}], fiber offset {:.6})",
            self.base.kind,
            self.base.complex_dim,
            self.s,
            self.warp.b(),
            self.c,
            self.offset
        )
    }
}

struct TauField(Arc<SkrChart>);

impl ScalarField for TauField {
    fn eval(&self, x: &[Jet2]) -> Jet2 {
        self.0.tau_jet(x).unwrap_or(Jet2::constant(f64::NAN))
    }
}

struct FField(Arc<SkrChart>, f64);

impl ScalarField for FField {
    fn eval(&self, x: &[Jet2]) -> Jet2 {
        match self.0.tau_jet(x) {
            Some(t) => t.recip() + self.1,
            None => Jet2::constant(f64::NAN),
        }
    }
}

impl ComplexStructure for SkrChart {
    fn eval(&self, x: &[Jet2]) -> Vec<Jet2> {
        self.j.eval(x)
    }
}
