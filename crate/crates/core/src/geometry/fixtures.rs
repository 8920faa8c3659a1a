//! Closed-form charts used as oracles: flat space, the round sphere, the
//! hyperbolic plane, Fubini–Study, Kähler metrics from explicit potentials and
//! random polynomial metrics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChartPoint, FnChart, FnField, Jet2, MetricChart, ScalarField};

fn diag(n: usize, entries: impl Fn(usize) -> Jet2) -> Vec<Jet2> {
    let mut g = vec![Jet2::constant(0.0); n * n];
    for i in 0..n {
        g[i * n + i] = entries(i);
    }
    g
}

pub fn euclidean(n: usize) -> impl MetricChart {
    FnChart::new(format!("euclidean R^{n}"), n, move |_x: &[Jet2]| {
        diag(n, |_| Jet2::constant(1.0))
    })
}

/// Unit round 2-sphere in polar coordinates `(θ, φ)`, `0 < θ < π`.
pub fn round_sphere() -> impl MetricChart {
    FnChart::new("round S^2 (polar)", 2, |x: &[Jet2]| {
        let s = x[0].sin();
        diag(2, |i| if i == 0 { Jet2::constant(1.0) } else { s * s })
    })
    .with_domain(|p: &ChartPoint| {
        let th = p.coords()[0];
        th > 0.0 && th < std::f64::consts::PI
    })
}

/// Upper half-plane model `(dx² + dy²)/y²`.
pub fn hyperbolic_plane() -> impl MetricChart {
    FnChart::new("hyperbolic plane", 2, |x: &[Jet2]| {
        let w = (x[1] * x[1]).recip();
        diag(2, |_| w)
    })
    .with_domain(|p: &ChartPoint| p.coords()[1] > 0.0)
}

/// `e^{2x}(dx² + dy²)` on `R²`.
pub fn exp_conformal_plane() -> impl MetricChart {
    FnChart::new("exp-conformal plane", 2, |x: &[Jet2]| {
        let w = (x[0] * 2.0).exp();
        diag(2, |_| w)
    })
}

/// Real form of a Hermitian metric `h_{jk̄}` on `C^k`: the Riemannian metric
/// `2 Re(h_{jk̄} X^j conj(Y^k))` in coordinates `(x_1, y_1, ..., x_k, y_k)`.
///
/// `re[j*k+l]` and `im[j*k+l]` hold the real and imaginary parts of `h_{jl̄}`.
pub fn hermitian_to_real(k: usize, re: &[Jet2], im: &[Jet2]) -> Vec<Jet2> {
    let n = 2 * k;
    let mut g = vec![Jet2::constant(0.0); n * n];
    for j in 0..k {
        for l in 0..k {
            let a = re[j * k + l] * 2.0;
            let b = im[j * k + l] * 2.0;
            let (xj, yj, xl, yl) = (2 * j, 2 * j + 1, 2 * l, 2 * l + 1);
            g[xj * n + xl] = a;
            g[yj * n + yl] = a;
            g[xj * n + yl] = b;
            g[yj * n + xl] = -b;
        }
    }
    g
}

/// Fubini–Study metric on the affine chart `C^k ⊂ CP^k`, with Kähler
/// potential `½ log(1 + |z|²)`: `h = I/σ − (p pᵀ + q qᵀ)/σ²` where
/// `σ = 1 + |z|²`, `p` is the position and `q = J p`. It is Euclidean at the
/// origin and has Einstein constant `2(k + 1)`.
pub fn fubini_study_block(z: &[Jet2]) -> Vec<Jet2> {
    let n = z.len();
    let sigma = z.iter().map(|&x| x * x).sum::<Jet2>() + 1.0;
    let inv = sigma.recip();
    let inv2 = inv * inv;
    let q: Vec<Jet2> = (0..n).map(|i| if i % 2 == 0 { -z[i + 1] } else { z[i - 1] }).collect();
    let mut h = vec![Jet2::constant(0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            let mut v = (z[a] * z[b] + q[a] * q[b]) * inv2;
            v = -v;
            if a == b {
                v += inv;
            }
            h[a * n + b] = v;
        }
    }
    h
}

pub fn fubini_study(k: usize) -> impl MetricChart {
    FnChart::new(format!("Fubini-Study CP^{k} (affine chart)"), 2 * k, |x: &[Jet2]| {
        fubini_study_block(x)
    })
}

/// Einstein constant of [`fubini_study`] on `CP^k`.
pub fn fubini_study_einstein_constant(k: usize) -> f64 {
    2.0 * (k as f64 + 1.0)
}

/// Hermitian but not Kähler on `C²`: `e^{x_2}(dx_1² + dy_1²) + dx_2² + dy_2²`.
///
/// The first complex direction is scaled by a function of the second one, so
/// the fundamental form is not closed.
pub fn hermitian_perturbation() -> impl MetricChart {
    FnChart::new("non-Kähler Hermitian perturbation of C^2", 4, |x: &[Jet2]| {
        let w = x[2].exp();
        diag(4, |i| if i < 2 { w } else { Jet2::constant(1.0) })
    })
}

/// Kähler metric on `C²` with potential
/// `|z_1|² + |z_2|² + e_1|z_1|²|z_2|² + e_2|z_1|⁴ + e_3|z_2|⁴`.
pub fn quartic_kahler(e1: f64, e2: f64, e3: f64) -> impl MetricChart {
    FnChart::new("quartic-potential Kähler metric on C^2", 4, move |x: &[Jet2]| {
        let (x1, y1, x2, y2) = (x[0], x[1], x[2], x[3]);
        let r1 = x1 * x1 + y1 * y1;
        let r2 = x2 * x2 + y2 * y2;
        let h11 = r2 * e1 + r1 * (4.0 * e2) + 1.0;
        let h22 = r1 * e1 + r2 * (4.0 * e3) + 1.0;
        // h_{12̄} = e_1 conj(z_1) z_2
        let re12 = (x1 * x2 + y1 * y2) * e1;
        let im12 = (x1 * y2 - y1 * x2) * e1;
        let zero = Jet2::constant(0.0);
        let re = [h11, re12, re12, h22];
        let im = [zero, im12, -im12, zero];
        hermitian_to_real(2, &re, &im)
    })
    .with_domain(|p: &ChartPoint| p.coords().iter().all(|x| x.abs() < 1.0))
}

/// Random symmetric metric `2I + linear + quadratic` with coefficients in
/// `[-0.1, 0.1]`; diagonally dominant, hence positive definite, on the box
/// `|x|_∞ < 0.5`.
pub struct RandomPolynomialMetric {
    n: usize,
    linear: Vec<f64>,
    quadratic: Vec<f64>,
}

impl RandomPolynomialMetric {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let linear = (0..n * n * n).map(|_| rng.random_range(-0.1..0.1)).collect();
        let quadratic = (0..n * n * n * n).map(|_| rng.random_range(-0.1..0.1)).collect();
        Self { n, linear, quadratic }
    }

    fn entry(&self, i: usize, j: usize, x: &[Jet2]) -> Jet2 {
        let n = self.n;
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let mut v = Jet2::constant(if i == j { 2.0 } else { 0.0 });
        for k in 0..n {
            v += x[k] * self.linear[(i * n + j) * n + k];
            for l in k..n {
                v += x[k] * x[l] * self.quadratic[((i * n + j) * n + k) * n + l] * 0.25;
            }
        }
        v
    }
}

impl MetricChart for RandomPolynomialMetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn components(&self, x: &[Jet2]) -> Vec<Jet2> {
        let n = self.n;
        (0..n * n).map(|c| self.entry(c / n, c % n, x)).collect()
    }

    fn contains(&self, p: &ChartPoint) -> bool {
        p.coords().iter().all(|x| x.abs() < 0.5)
    }

    fn describe(&self) -> String {
        format!("random polynomial metric on R^{}", self.n)
    }
}

/// Closure-backed scalar field.
pub fn field<F>(f: F) -> impl ScalarField
where
    F: Fn(&[Jet2]) -> Jet2 + Send + Sync,
{
    FnField(f)
}

/// `τ ≡ value`
pub fn constant_field(value: f64) -> impl ScalarField {
    FnField(move |_x: &[Jet2]| Jet2::constant(value))
}

/// `sin(q) + q` for a random quadratic `q`, for derivative checks.
pub fn random_quadratic_field(n: usize, seed: u64) -> impl ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: f64 = rng.random_range(-1.0..1.0);
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let a: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    FnField(move |x: &[Jet2]| {
        let mut v = Jet2::constant(c);
        for i in 0..n {
            v += x[i] * b[i];
            for j in i..n {
                v += x[i] * x[j] * a[i * n + j];
            }
        }
        v.sin() + v
    })
}
