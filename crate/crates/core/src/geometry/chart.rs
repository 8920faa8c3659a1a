use std::sync::Arc;

use super::{GeometryError, Jet2};

/// A point of a coordinate chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Jets seeded at this point, one variable per coordinate.
    pub fn seed(&self) -> Vec<Jet2> {
        Jet2::seed(&self.coords)
    }

    /// The point with coordinate `i` moved by `h`.
    pub fn shifted(&self, i: usize, h: f64) -> ChartPoint {
        let mut coords = self.coords.clone();
        coords[i] += h;
        ChartPoint { coords }
    }
}

/// A Riemannian metric in one coordinate chart.
///
/// `components` receives jets seeded at a chart point and returns the
/// row-major `dim × dim` component matrix as jets, so every component comes
/// with exact first and second partial derivatives.
pub trait MetricChart: Send + Sync {
    fn dim(&self) -> usize;

    fn components(&self, x: &[Jet2]) -> Vec<Jet2>;

    fn contains(&self, _p: &ChartPoint) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("{}-dimensional chart", self.dim())
    }
}

/// A smooth function on a chart, evaluated on seeded jets.
pub trait ScalarField: Send + Sync {
    fn eval(&self, x: &[Jet2]) -> Jet2;
}

/// An almost complex structure `J` given as the row-major matrix `J^i_j`
/// acting on tangent vectors.
pub trait ComplexStructure: Send + Sync {
    fn eval(&self, x: &[Jet2]) -> Vec<Jet2>;
}

impl<T: MetricChart + ?Sized> MetricChart for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self, x: &[Jet2]) -> Vec<Jet2> {
        (**self).components(x)
    }
    fn contains(&self, p: &ChartPoint) -> bool {
        (**self).contains(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: MetricChart + ?Sized> MetricChart for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn components(&self, x: &[Jet2]) -> Vec<Jet2> {
        (**self).components(x)
    }
    fn contains(&self, p: &ChartPoint) -> bool {
        (**self).contains(p)
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn eval(&self, x: &[Jet2]) -> Jet2 {
        (**self).eval(x)
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn eval(&self, x: &[Jet2]) -> Jet2 {
        (**self).eval(x)
    }
}

impl<T: ComplexStructure + ?Sized> ComplexStructure for Arc<T> {
    fn eval(&self, x: &[Jet2]) -> Vec<Jet2> {
        (**self).eval(x)
    }
}

impl<T: ComplexStructure + ?Sized> ComplexStructure for &T {
    fn eval(&self, x: &[Jet2]) -> Vec<Jet2> {
        (**self).eval(x)
    }
}

/// Metric chart backed by closures.
pub struct FnChart<F, D = fn(&ChartPoint) -> bool> {
    dim: usize,
    name: String,
    components: F,
    domain: D,
}

impl<F> FnChart<F>
where
    F: Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync,
{
    pub fn new(name: impl Into<String>, dim: usize, components: F) -> Self {
        Self {
            dim,
            name: name.into(),
            components,
            domain: |_| true,
        }
    }
}

impl<F, D> FnChart<F, D> {
    pub fn with_domain<D2>(self, domain: D2) -> FnChart<F, D2>
    where
        D2: Fn(&ChartPoint) -> bool + Send + Sync,
    {
        FnChart {
            dim: self.dim,
            name: self.name,
            components: self.components,
            domain,
        }
    }
}

impl<F, D> MetricChart for FnChart<F, D>
where
    F: Fn(&[Jet2]) -> Vec<Jet2> + Send + Sync,
    D: Fn(&ChartPoint) -> bool + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, x: &[Jet2]) -> Vec<Jet2> {
        (self.components)(x)
    }
    fn contains(&self, p: &ChartPoint) -> bool {
        (self.domain)(p)
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Scalar field backed by a closure.
pub struct FnField<F>(pub F);

impl<F> ScalarField for FnField<F>
where
    F: Fn(&[Jet2]) -> Jet2 + Send + Sync,
{
    fn eval(&self, x: &[Jet2]) -> Jet2 {
        (self.0)(x)
    }
}

/// The constant complex structure of `C^k` in real coordinates
/// `(x_1, y_1, ..., x_k, y_k)`: `J ∂x = ∂y`, `J ∂y = -∂x`.
#[derive(Clone, Copy, Debug)]
pub struct StandardComplexStructure {
    pub dim: usize,
}

impl StandardComplexStructure {
    pub fn new(dim: usize) -> Self {
        assert!(dim.is_multiple_of(2), "complex structure needs even dimension");
        Self { dim }
    }

    pub fn matrix(dim: usize) -> Vec<f64> {
        let mut j = vec![0.0; dim * dim];
        for p in (0..dim).step_by(2) {
            j[(p + 1) * dim + p] = 1.0;
            j[p * dim + p + 1] = -1.0;
        }
        j
    }
}

impl ComplexStructure for StandardComplexStructure {
    fn eval(&self, _x: &[Jet2]) -> Vec<Jet2> {
        Self::matrix(self.dim).into_iter().map(Jet2::constant).collect()
    }
}

/// The metric `g / τ²` on the part of the chart where `τ ≠ 0`.
pub struct ConformalChart {
    base: Arc<dyn MetricChart>,
    factor: Arc<dyn ScalarField>,
}

impl ConformalChart {
    pub fn new(base: Arc<dyn MetricChart>, factor: Arc<dyn ScalarField>) -> Self {
        Self { base, factor }
    }

    pub fn base(&self) -> &Arc<dyn MetricChart> {
        &self.base
    }

    pub fn factor(&self) -> &Arc<dyn ScalarField> {
        &self.factor
    }
}

impl MetricChart for ConformalChart {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn components(&self, x: &[Jet2]) -> Vec<Jet2> {
        let tau = self.factor.eval(x);
        let inv_sq = (tau * tau).recip();
        self.base.components(x).into_iter().map(|g| g * inv_sq).collect()
    }

    fn contains(&self, p: &ChartPoint) -> bool {
        if !self.base.contains(p) {
            return false;
        }
        let v = self.factor.eval(&p.seed()).value();
        v.is_finite() && v.abs() > 1e-300
    }

    fn describe(&self) -> String {
        format!("conformal rescaling of ({})", self.base.describe())
    }
}

/// Divides the metric by `τ²`, restricting the domain to `τ ≠ 0`.
///
/// Fails if `τ` vanishes at one of the supplied probe points, which callers
/// use to assert the requested working domain avoids the zero set.
pub fn conformal_scale(
    g: Arc<dyn MetricChart>,
    tau: Arc<dyn ScalarField>,
    probes: &[ChartPoint],
) -> Result<ConformalChart, GeometryError> {
    for p in probes {
        let v = tau.eval(&p.seed()).value();
        if v == 0.0 || !v.is_finite() {
            return Err(GeometryError::ZeroConformalFactor);
        }
    }
    Ok(ConformalChart::new(g, tau))
}

/// Maximum mismatch between jet derivatives of a scalar field and central
/// finite differences of its values, relative to `max(1, |derivative|)`.
pub fn field_derivative_defect(f: &dyn ScalarField, p: &ChartPoint, h: f64) -> f64 {
    let values = |q: &ChartPoint| vec![f.eval(&q.seed())];
    derivative_defect_impl(&values, p, h)
}

/// As [`field_derivative_defect`], over every metric component.
pub fn metric_derivative_defect(g: &dyn MetricChart, p: &ChartPoint, h: f64) -> f64 {
    let values = |q: &ChartPoint| g.components(&q.seed());
    derivative_defect_impl(&values, p, h)
}

fn derivative_defect_impl(eval: &dyn Fn(&ChartPoint) -> Vec<Jet2>, p: &ChartPoint, h: f64) -> f64 {
    let n = p.dim();
    let at = eval(p);
    let val = |q: &ChartPoint| eval(q).into_iter().map(|j| j.value()).collect::<Vec<_>>();
    let rel = |ad: f64, fd: f64| (ad - fd).abs() / ad.abs().max(fd.abs()).max(1.0);
    let mut worst = 0.0f64;
    for k in 0..n {
        let plus = val(&p.shifted(k, h));
        let minus = val(&p.shifted(k, -h));
        for (c, jet) in at.iter().enumerate() {
            let fd1 = (plus[c] - minus[c]) / (2.0 * h);
            worst = worst.max(rel(jet.d(k), fd1));
            let fd2 = (plus[c] - 2.0 * jet.value() + minus[c]) / (h * h);
            worst = worst.max(rel(jet.dd(k, k), fd2));
        }
        for l in 0..k {
            let pp = val(&p.shifted(k, h).shifted(l, h));
            let pm = val(&p.shifted(k, h).shifted(l, -h));
            let mp = val(&p.shifted(k, -h).shifted(l, h));
            let mm = val(&p.shifted(k, -h).shifted(l, -h));
            for (c, jet) in at.iter().enumerate() {
                let fd = (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h);
                worst = worst.max(rel(jet.dd(k, l), fd));
            }
        }
    }
    worst
}
