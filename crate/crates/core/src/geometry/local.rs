use nalgebra::{DMatrix, DVector};

use super::{ChartPoint, ComplexStructure, GeometryError, Jet2, MetricChart, ScalarField};

/// Pivot threshold of the positive-definiteness guard.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Christoffel symbols of the second kind, `Γ^k_{ij}`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_{ij}`
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// Largest `|Γ^k_{ij}|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Everything the curvature identities need at one chart point: metric,
/// inverse, derivatives, connection and curvature.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    n: usize,
    point: ChartPoint,
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    /// `∂_k g_{ij}` at `(k, i, j)`.
    dg: Vec<f64>,
    gamma: Christoffel,
    /// `∂_m Γ^k_{ij}` at `(m, k, i, j)`.
    dgamma: Vec<f64>,
    /// `R^a_{bcd}`
    riemann: Vec<f64>,
    ricci: DMatrix<f64>,
}

/// Cholesky factorization with an absolute pivot floor. Returns the smallest
/// pivot on success.
pub fn positive_definite_pivot(g: &DMatrix<f64>) -> Result<f64, GeometryError> {
    let n = g.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > PIVOT_THRESHOLD) {
            return Err(GeometryError::NotPositiveDefinite { pivot: d });
        }
        min_pivot = min_pivot.min(d);
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(min_pivot)
}

impl LocalGeometry {
    pub fn at(chart: &dyn MetricChart, p: &ChartPoint) -> Result<Self, GeometryError> {
        let n = chart.dim();
        if p.dim() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                got: p.dim(),
            });
        }
        if !chart.contains(p) {
            return Err(GeometryError::OutsideDomain);
        }
        let comps = chart.components(&p.seed());
        if comps.len() != n * n {
            return Err(GeometryError::DimensionMismatch {
                expected: n * n,
                got: comps.len(),
            });
        }
        if comps.iter().any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let c = |i: usize, j: usize| &comps[i * n + j];
        let scale = comps.iter().map(|c| c.value().abs()).fold(1.0, f64::max);
        for i in 0..n {
            for j in 0..i {
                if (c(i, j).value() - c(j, i).value()).abs() > 1e-12 * scale {
                    return Err(GeometryError::NotSymmetric);
                }
            }
        }
        // Symmetrize so round-off in the oracle cannot leak into curvature.
        let g = DMatrix::from_fn(n, n, |i, j| 0.5 * (c(i, j).value() + c(j, i).value()));
        positive_definite_pivot(&g)?;
        let ginv = g.clone().try_inverse().ok_or(GeometryError::Singular)?;

        let idx3 = |a: usize, b: usize, cc: usize| (a * n + b) * n + cc;
        let idx4 = |a: usize, b: usize, cc: usize, d: usize| ((a * n + b) * n + cc) * n + d;

        let mut dg = vec![0.0; n * n * n];
        let mut ddg = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (c(i, j), c(j, i));
                for k in 0..n {
                    dg[idx3(k, i, j)] = 0.5 * (a.d(k) + b.d(k));
                    for l in 0..n {
                        ddg[idx4(k, l, i, j)] = 0.5 * (a.dd(k, l) + b.dd(k, l));
                    }
                }
            }
        }

        // First kind: Γ_{lij} = ½(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}), and its
        // derivatives ∂_m Γ_{lij}.
        let mut first = vec![0.0; n * n * n];
        let mut dfirst = vec![0.0; n * n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    first[idx3(l, i, j)] = 0.5 * (dg[idx3(i, j, l)] + dg[idx3(j, i, l)] - dg[idx3(l, i, j)]);
                    for m in 0..n {
                        dfirst[idx4(m, l, i, j)] =
                            0.5 * (ddg[idx4(m, i, j, l)] + ddg[idx4(m, j, i, l)] - ddg[idx4(m, l, i, j)]);
                    }
                }
            }
        }

        // ∂_m g^{kl} = −g^{ka} ∂_m g_{ab} g^{bl}
        let mut dginv = vec![0.0; n * n * n];
        for m in 0..n {
            let dgm = DMatrix::from_fn(n, n, |a, b| dg[idx3(m, a, b)]);
            let prod = -(&ginv * dgm * &ginv);
            for k in 0..n {
                for l in 0..n {
                    dginv[idx3(m, k, l)] = prod[(k, l)];
                }
            }
        }

        let mut gamma = vec![0.0; n * n * n];
        let mut dgamma = vec![0.0; n * n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * first[idx3(l, i, j)];
                    }
                    gamma[idx3(k, i, j)] = s;
                    for m in 0..n {
                        let mut ds = 0.0;
                        for l in 0..n {
                            ds += dginv[idx3(m, k, l)] * first[idx3(l, i, j)] + ginv[(k, l)] * dfirst[idx4(m, l, i, j)];
                        }
                        dgamma[idx4(m, k, i, j)] = ds;
                    }
                }
            }
        }

        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
        let mut riemann = vec![0.0; n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let mut r = dgamma[idx4(cc, a, d, b)] - dgamma[idx4(d, a, cc, b)];
                        for e in 0..n {
                            r += gamma[idx3(a, cc, e)] * gamma[idx3(e, d, b)]
                                - gamma[idx3(a, d, e)] * gamma[idx3(e, cc, b)];
                        }
                        riemann[idx4(a, b, cc, d)] = r;
                    }
                }
            }
        }
        // r_{bd} = R^a_{bad}
        let ricci = DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| riemann[idx4(a, b, a, d)]).sum());

        Ok(Self {
            n,
            point: p.clone(),
            g,
            ginv,
            dg,
            gamma: Christoffel { n, data: gamma },
            dgamma,
            riemann,
            ricci,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> &ChartPoint {
        &self.point
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn inverse_metric(&self) -> &DMatrix<f64> {
        &self.ginv
    }

    /// `∂_k g_{ij}`
    pub fn metric_derivative(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dg[(k * self.n + i) * self.n + j]
    }

    pub fn christoffel(&self) -> &Christoffel {
        &self.gamma
    }

    /// `∂_m Γ^k_{ij}`
    pub fn christoffel_derivative(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        self.dgamma[((m * self.n + k) * self.n + i) * self.n + j]
    }

    /// `R^a_{bcd}`
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.riemann[((a * self.n + b) * self.n + c) * self.n + d]
    }

    /// `R_{abcd} = g_{ae} R^e_{bcd}`
    pub fn riemann_lowered(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        (0..self.n).map(|e| self.g[(a, e)] * self.riemann(e, b, c, d)).sum()
    }

    pub fn ricci(&self) -> &DMatrix<f64> {
        &self.ricci
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.ginv.component_mul(&self.ricci).sum()
    }

    /// Largest `|R_{abcd} + R_{acdb} + R_{adbc}|`.
    pub fn first_bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = self.riemann_lowered(a, b, c, d)
                            + self.riemann_lowered(a, c, d, b)
                            + self.riemann_lowered(a, d, b, c);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest `|∂_k g_{ij} − Γ^l_{ki} g_{lj} − Γ^l_{kj} g_{il}|`.
    pub fn metric_compatibility_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = self.metric_derivative(k, i, j);
                    for l in 0..n {
                        s -= self.gamma.get(l, k, i) * self.g[(l, j)] + self.gamma.get(l, k, j) * self.g[(i, l)];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    fn check_field(&self, f: &Jet2) -> Result<(), GeometryError> {
        if !f.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(())
    }

    /// Evaluates a scalar field as a jet at this point.
    pub fn field(&self, f: &dyn ScalarField) -> Result<Jet2, GeometryError> {
        let j = f.eval(&self.point.seed());
        self.check_field(&j)?;
        Ok(j)
    }

    pub fn differential(&self, f: &Jet2) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| f.d(i))
    }

    /// `∇f = g^{ij} ∂_j f`
    pub fn gradient(&self, f: &Jet2) -> DVector<f64> {
        &self.ginv * self.differential(f)
    }

    /// `g(∇f, ∇f)`
    pub fn grad_norm_sq(&self, f: &Jet2) -> f64 {
        let df = self.differential(f);
        df.dot(&(&self.ginv * &df))
    }

    /// `g(∇f, ∇h)`
    pub fn grad_inner(&self, f: &Jet2, h: &Jet2) -> f64 {
        self.differential(f).dot(&(&self.ginv * self.differential(h)))
    }

    /// `(∇df)_{ij} = ∂_i ∂_j f − Γ^k_{ij} ∂_k f`
    pub fn hessian(&self, f: &Jet2) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            let mut h = 0.5 * (f.dd(i, j) + f.dd(j, i));
            for k in 0..n {
                h -= self.gamma.get(k, i, j) * f.d(k);
            }
            h
        })
    }

    /// `Δf = g^{ij} (∇df)_{ij}`
    pub fn laplacian(&self, f: &Jet2) -> f64 {
        self.ginv.component_mul(&self.hessian(f)).sum()
    }

    /// `L_K g` for `K = J∇τ`, i.e. `∇_i K_j + ∇_j K_i`.
    pub fn killing_residual(&self, tau: &Jet2, j: &[Jet2]) -> DMatrix<f64> {
        let n = self.n;
        let w = self.gradient(tau);
        // ∂_i W^m = ∂_i g^{mk} ∂_k τ + g^{mk} ∂_i ∂_k τ
        let mut dw = DMatrix::<f64>::zeros(n, n); // (i, m)
        for i in 0..n {
            let dgi = DMatrix::from_fn(n, n, |a, b| self.metric_derivative(i, a, b));
            let dginv = -(&self.ginv * dgi * &self.ginv);
            for m in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += dginv[(m, k)] * tau.d(k) + self.ginv[(m, k)] * tau.dd(i, k);
                }
                dw[(i, m)] = s;
            }
        }
        let jv = |l: usize, m: usize| &j[l * n + m];
        let k_vec: Vec<f64> = (0..n).map(|l| (0..n).map(|m| jv(l, m).value() * w[m]).sum()).collect();
        let dk = DMatrix::from_fn(n, n, |i, l| {
            (0..n)
                .map(|m| jv(l, m).d(i) * w[m] + jv(l, m).value() * dw[(i, m)])
                .sum::<f64>()
        });
        DMatrix::from_fn(n, n, |a, b| {
            let mut s = 0.0;
            for l in 0..n {
                s += k_vec[l] * self.metric_derivative(l, a, b)
                    + self.g[(l, b)] * dk[(a, l)]
                    + self.g[(a, l)] * dk[(b, l)];
            }
            s
        })
    }

    /// Largest entry of `(∇_k J)^i_j = ∂_k J^i_j + Γ^i_{kl} J^l_j − Γ^l_{kj} J^i_l`.
    pub fn kahler_residual(&self, j: &[Jet2]) -> f64 {
        let n = self.n;
        let jv = |a: usize, b: usize| &j[a * n + b];
        let mut worst = 0.0f64;
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let mut s = jv(a, b).d(k);
                    for l in 0..n {
                        s += self.gamma.get(a, k, l) * jv(l, b).value() - self.gamma.get(l, k, b) * jv(a, l).value();
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    /// Defects of an almost complex structure: `max|J² + I|` and
    /// `max|g(J·,J·) − g|`.
    pub fn complex_structure_defect(&self, j: &[Jet2]) -> (f64, f64) {
        let n = self.n;
        let jm = DMatrix::from_fn(n, n, |a, b| j[a * n + b].value());
        let sq = &jm * &jm + DMatrix::<f64>::identity(n, n);
        let herm = jm.transpose() * &self.g * &jm - &self.g;
        (sq.amax(), herm.amax())
    }
}

macro_rules! at_point {
    ($g:expr, $p:expr) => {
        LocalGeometry::at($g, $p)?
    };
}

/// `Γ^k_{ij}` of `g` at `p`.
pub fn christoffel(g: &dyn MetricChart, p: &ChartPoint) -> Result<Christoffel, GeometryError> {
    Ok(at_point!(g, p).christoffel().clone())
}

pub fn ricci(g: &dyn MetricChart, p: &ChartPoint) -> Result<DMatrix<f64>, GeometryError> {
    Ok(at_point!(g, p).ricci().clone())
}

pub fn hessian(g: &dyn MetricChart, tau: &dyn ScalarField, p: &ChartPoint) -> Result<DMatrix<f64>, GeometryError> {
    let geo = at_point!(g, p);
    let t = geo.field(tau)?;
    Ok(geo.hessian(&t))
}

pub fn grad_norm_sq(g: &dyn MetricChart, tau: &dyn ScalarField, p: &ChartPoint) -> Result<f64, GeometryError> {
    let geo = at_point!(g, p);
    let t = geo.field(tau)?;
    Ok(geo.grad_norm_sq(&t))
}

pub fn laplacian(g: &dyn MetricChart, tau: &dyn ScalarField, p: &ChartPoint) -> Result<f64, GeometryError> {
    let geo = at_point!(g, p);
    let t = geo.field(tau)?;
    Ok(geo.laplacian(&t))
}

pub fn killing_residual(
    g: &dyn MetricChart,
    tau: &dyn ScalarField,
    j: &dyn ComplexStructure,
    p: &ChartPoint,
) -> Result<DMatrix<f64>, GeometryError> {
    let geo = at_point!(g, p);
    let t = geo.field(tau)?;
    Ok(geo.killing_residual(&t, &j.eval(&p.seed())))
}

pub fn kahler_residual(g: &dyn MetricChart, j: &dyn ComplexStructure, p: &ChartPoint) -> Result<f64, GeometryError> {
    let geo = at_point!(g, p);
    Ok(geo.kahler_residual(&j.eval(&p.seed())))
}
