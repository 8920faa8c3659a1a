use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::geometry::{ConformalChart, Jet2, LocalGeometry};
use crate::ode::{rh_coefficients, SkrParams};

use super::report::{CheckRecord, Exclusion};
use super::subject::{Site, Subject};

/// Extra attempts per sample before it is reported as an exclusion.
pub const RETRIES: u64 = 2;
/// Index offset between a sample and its replacement. Odd and coprime to
/// the small primes, so the replacement differs in the leading Halton digits.
pub const RESAMPLE_STRIDE: u64 = 1_000_003;

/// Per-sample values of one check, ordered by sample index.
pub(crate) struct Collected {
    pub values: Vec<(u64, Vec<f64>)>,
    pub resampled: usize,
    pub exclusions: Vec<Exclusion>,
}

/// Evaluates `eval` on `samples` sites in parallel. The result does not
/// depend on scheduling: rayon's indexed collect keeps sample order.
pub(crate) fn collect<F>(subject: &dyn Subject, samples: usize, eval: F) -> Collected
where
    F: Fn(&Site) -> Result<Vec<f64>, String> + Sync,
{
    let results: Vec<(u64, Result<(Vec<f64>, u64), String>)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut last = String::new();
            for attempt in 0..=RETRIES {
                let idx = i + attempt * RESAMPLE_STRIDE;
                match subject.site(idx).and_then(|s| eval(&s)) {
                    Ok(v) if v.iter().all(|x| x.is_finite()) => return (i, Ok((v, attempt))),
                    Ok(_) => last = "non-finite residual".to_string(),
                    Err(e) => last = e,
                }
            }
            (i, Err(last))
        })
        .collect();
    let mut out = Collected {
        values: Vec::with_capacity(samples),
        resampled: 0,
        exclusions: Vec::new(),
    };
    for (i, r) in results {
        match r {
            Ok((v, attempt)) => {
                if attempt > 0 {
                    out.resampled += 1;
                }
                out.values.push((i, v));
            }
            Err(reason) => out.exclusions.push(Exclusion { index: i, reason }),
        }
    }
    out
}

fn record(name: &str, tol: f64, c: Collected) -> CheckRecord {
    let residuals: Vec<f64> = c.values.iter().map(|(_, v)| v[0]).collect();
    let total = residuals.len() + c.exclusions.len();
    let many_excluded = c.exclusions.len() * 10 > total;
    let mut rec = CheckRecord::from_residuals(name, tol, &residuals, c.resampled, c.exclusions);
    if many_excluded {
        rec.verdict = super::report::CheckVerdict::Fail;
        rec.notes.push("more than 10% of samples excluded".to_string());
    }
    rec
}

/// `E` with `Eᵀ g E = I`, so `Eᵀ T E` are frame components of a 2-tensor.
pub fn orthonormal_frame(g: &DMatrix<f64>) -> Result<DMatrix<f64>, String> {
    let l = g.clone().cholesky().ok_or("metric is not positive definite")?.l();
    l.transpose().try_inverse().ok_or_else(|| "singular metric".to_string())
}

/// Largest orthonormal-frame component of `t`.
pub fn frame_max(e: &DMatrix<f64>, t: &DMatrix<f64>) -> f64 {
    (e.transpose() * t * e).amax()
}

fn geometry(site: &Site) -> Result<LocalGeometry, String> {
    LocalGeometry::at(site.chart.as_ref(), &site.point).map_err(|e| e.to_string())
}

fn tau_jet(site: &Site, lg: &LocalGeometry) -> Result<Jet2, String> {
    let tau = site.tau.as_ref().ok_or("subject has no tau")?;
    lg.field(tau.as_ref()).map_err(|e| e.to_string())
}

fn j_jets(site: &Site) -> Result<Vec<Jet2>, String> {
    let j = site.j.as_ref().ok_or("subject has no complex structure")?;
    Ok(j.eval(&site.point.seed()))
}

fn j_matrix(j: &[Jet2], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| j[a * n + b].value())
}

/// `|∇J|`, relative to the size of the Christoffel symbols.
pub fn check_kahler(subject: &dyn Subject, samples: usize, tol: f64) -> CheckRecord {
    let c = collect(subject, samples, |site| {
        let lg = geometry(site)?;
        let j = j_jets(site)?;
        Ok(vec![lg.kahler_residual(&j) / lg.christoffel().max_abs().max(1.0)])
    });
    record("kahler", tol, c)
}

/// `L_{J∇τ} g` in an orthonormal frame, relative to the size of `∇dτ`.
pub fn check_killing(subject: &dyn Subject, samples: usize, tol: f64) -> CheckRecord {
    let c = collect(subject, samples, |site| {
        let lg = geometry(site)?;
        let tau = tau_jet(site, &lg)?;
        let j = j_jets(site)?;
        let e = orthonormal_frame(lg.metric())?;
        let scale = frame_max(&e, &lg.hessian(&tau)).max(1.0);
        Ok(vec![frame_max(&e, &lg.killing_residual(&tau, &j)) / scale])
    });
    record("killing", tol, c)
}

/// g-orthonormal bases of `V = span(∇τ, J∇τ)` and of `H = V^⊥`.
pub fn split_frames(
    g: &DMatrix<f64>,
    grad: &DVector<f64>,
    jm: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>), String> {
    let n = g.nrows();
    let ip = |x: &DVector<f64>, y: &DVector<f64>| x.dot(&(g * y));
    let q = ip(grad, grad);
    if !(q > 1e-24 * g.amax()) {
        return Err("gradient of tau vanishes".to_string());
    }
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n);
    let push = |v: DVector<f64>, basis: &mut Vec<DVector<f64>>| {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                w -= b * ip(b, &w);
            }
        }
        let norm = ip(&w, &w);
        if norm > 1e-20 * ip(&v, &v) {
            basis.push(w / norm.sqrt());
        }
    };
    push(grad.clone(), &mut basis);
    push(jm * grad, &mut basis);
    if basis.len() != 2 {
        return Err("J grad tau is parallel to grad tau".to_string());
    }
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        push(DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 }), &mut basis);
    }
    if basis.len() != n {
        return Err("could not complete the frame".to_string());
    }
    let v = DMatrix::from_columns(&basis[..2]);
    let h = DMatrix::from_columns(&basis[2..]);
    Ok((v, h))
}

/// Deviation of the `H` block of `t` from a multiple of the identity and its
/// leakage into `H × V`, with the multiple.
fn block_deviation(t: &DMatrix<f64>, eh: &DMatrix<f64>, ev: &DMatrix<f64>) -> (f64, f64) {
    let rank = eh.ncols();
    if rank == 0 {
        return (0.0, 0.0);
    }
    let b = eh.transpose() * t * eh;
    let mult = b.trace() / rank as f64;
    let dev = (b - DMatrix::<f64>::identity(rank, rank) * mult).amax();
    let leak = (eh.transpose() * t * ev).amax();
    (dev.max(leak), mult)
}

/// Every vector orthogonal to `∇τ` and `J∇τ` is an eigenvector of `∇dτ` and
/// of `r` with a common eigenvalue: deviation of the horizontal blocks from
/// scalar multiples of `g|_H` plus `H`–`V` leakage, relative to the tensor
/// sizes.
pub fn check_skr(subject: &dyn Subject, samples: usize, tol: f64) -> CheckRecord {
    let c = collect(subject, samples, |site| {
        let lg = geometry(site)?;
        let tau = tau_jet(site, &lg)?;
        let j = j_jets(site)?;
        let n = lg.dim();
        let g = lg.metric();
        let (ev, eh) = split_frames(g, &lg.gradient(&tau), &j_matrix(&j, n))?;
        let e = orthonormal_frame(g)?;
        let hess = lg.hessian(&tau);
        let ric = lg.ricci();
        let (dh, phi) = block_deviation(&hess, &eh, &ev);
        let (dr, _) = block_deviation(ric, &eh, &ev);
        let hs = frame_max(&e, &hess).max(1.0);
        let rs = frame_max(&e, ric).max(1.0);
        Ok(vec![(dh / hs).max(dr / rs), phi / hs])
    });
    let trivial = !c.values.is_empty() && c.values.iter().all(|(_, v)| v[1].abs() < 1e-10);
    let rank_zero = subject.site(0).map(|s| s.chart.dim() <= 2).unwrap_or(false);
    let mut rec = record("skr", tol, c);
    if trivial {
        rec.notes
            .push("trivial: horizontal Hessian eigenvalue is zero at every sample".to_string());
    }
    if rank_zero {
        rec.notes
            .push("horizontal distribution is zero-dimensional".to_string());
    }
    rec
}

/// Coefficient profiles `(α, γ)` of `α∇dτ + r = γg`, given `τ`, `|∇τ|²` and
/// `Δτ` at the sample.
pub trait RicciHessianProfile: Send + Sync {
    fn coefficients(&self, tau: f64, q: f64, lap: f64) -> Result<(f64, f64), String>;
}

/// The profiles of `f = 1/τ + k` for the given parameters.
pub struct SkrProfiles(pub SkrParams);

impl RicciHessianProfile for SkrProfiles {
    fn coefficients(&self, tau: f64, q: f64, lap: f64) -> Result<(f64, f64), String> {
        rh_coefficients(&self.0, tau, q, lap).map_err(|e| e.to_string())
    }
}

/// `α ≡ alpha`, `γ ≡ gamma`
pub struct ConstantProfiles {
    pub alpha: f64,
    pub gamma: f64,
}

impl RicciHessianProfile for ConstantProfiles {
    fn coefficients(&self, _: f64, _: f64, _: f64) -> Result<(f64, f64), String> {
        Ok((self.alpha, self.gamma))
    }
}

pub fn check_ricci_hessian(
    subject: &dyn Subject,
    profile: &dyn RicciHessianProfile,
    samples: usize,
    tol: f64,
) -> CheckRecord {
    let c = collect(subject, samples, |site| {
        let lg = geometry(site)?;
        let tau = tau_jet(site, &lg)?;
        let (al, ga) = profile.coefficients(tau.value(), lg.grad_norm_sq(&tau), lg.laplacian(&tau))?;
        let e = orthonormal_frame(lg.metric())?;
        let hess = lg.hessian(&tau);
        let t = &hess * al + lg.ricci() - lg.metric() * ga;
        let scale = (al.abs() * frame_max(&e, &hess))
            .max(frame_max(&e, lg.ricci()))
            .max(ga.abs())
            .max(1.0);
        Ok(vec![frame_max(&e, &t) / scale])
    });
    record("ricci-hessian", tol, c)
}

/// `ĝ = g/τ²` at the site with `f` as a jet.
fn rescaled(site: &Site) -> Result<(LocalGeometry, Jet2), String> {
    let tau = site.tau.as_ref().ok_or("subject has no tau")?;
    let f = site.f.as_ref().ok_or("subject has no f")?;
    let tv = tau.eval(&site.point.seed()).value();
    if !(tv.abs() > 1e-12) {
        return Err(format!("tau = {tv} is at the pole of the rescaling"));
    }
    let hat = ConformalChart::new(site.chart.clone(), tau.clone());
    let lg = LocalGeometry::at(&hat, &site.point).map_err(|e| e.to_string())?;
    let fj = lg.field(f.as_ref()).map_err(|e| e.to_string())?;
    Ok((lg, fj))
}

/// `(−a/f)∇̂df + r̂ − λĝ` for `ĝ = g/τ²`, in a `ĝ`-frame.
pub fn check_quasi_einstein(subject: &dyn Subject, a: f64, lambda: f64, samples: usize, tol: f64) -> CheckRecord {
    let c = collect(subject, samples, |site| {
        let (lg, f) = rescaled(site)?;
        if !(f.value().abs() > 1e-12) {
            return Err(format!("f = {} vanishes", f.value()));
        }
        let e = orthonormal_frame(lg.metric())?;
        let hess = lg.hessian(&f);
        let coef = -a / f.value();
        let t = &hess * coef + lg.ricci() - lg.metric() * lambda;
        let scale = (coef.abs() * frame_max(&e, &hess))
            .max(frame_max(&e, lg.ricci()))
            .max(lambda.abs())
            .max(1.0);
        Ok(vec![frame_max(&e, &t) / scale])
    });
    record("quasi-einstein", tol, c)
}

/// Spread of `μ = fΔ̂f + (a − 1)|∇̂f|² + λf²` around its value at the first
/// sample, relative to `max(1, |μ(p0)|)`. Skipped unless `a` is a positive
/// integer.
pub fn check_warped_einstein_constant(
    subject: &dyn Subject,
    a: f64,
    lambda: f64,
    samples: usize,
    tol: f64,
) -> CheckRecord {
    const NAME: &str = "warped-einstein-constant";
    if !(a > 0.0 && a.fract() == 0.0) {
        return CheckRecord::skipped(NAME, tol, format!("a = {a} is not a positive integer"));
    }
    let c = collect(subject, samples, |site| {
        let (lg, f) = rescaled(site)?;
        let fv = f.value();
        Ok(vec![
            fv * lg.laplacian(&f) + (a - 1.0) * lg.grad_norm_sq(&f) + lambda * fv * fv,
        ])
    });
    let mu0 = c.values.first().map(|(_, v)| v[0]).unwrap_or(0.0);
    let scale = mu0.abs().max(1.0);
    let spread = Collected {
        values: c
            .values
            .iter()
            .map(|(i, v)| (*i, vec![(v[0] - mu0).abs() / scale]))
            .collect(),
        resampled: c.resampled,
        exclusions: c.exclusions,
    };
    let mut rec = record(NAME, tol, spread);
    rec.notes.push(format!("mu(p0) = {mu0:e}"));
    rec
}

/// Direct `r̂`, `∇̂df` of `ĝ = g/τ²` against their expansions in `g`:
/// `r̂ = r + (n − 2)τ⁻¹∇dτ + [τ⁻¹Δτ − (n − 1)τ⁻²|∇τ|²]g` and
/// `∇̂df = ∇df + τ⁻¹[dτ⊗df + df⊗dτ − g(∇τ, ∇f)g]`. Uses `τ` itself when the
/// subject has no `f`.
pub fn check_conformal_formulas(subject: &dyn Subject, samples: usize, tol: f64) -> CheckRecord {
    let c = collect(subject, samples, |site| {
        let mut site = site.clone();
        if site.f.is_none() {
            site.f = site.tau.clone();
        }
        let (lh, fh) = rescaled(&site)?;
        let lg = geometry(&site)?;
        let tau = tau_jet(&site, &lg)?;
        let f = lg.field(site.f.as_ref().unwrap().as_ref()).map_err(|e| e.to_string())?;
        let n = lg.dim() as f64;
        let t = tau.value();
        let g = lg.metric();
        let q = lg.grad_norm_sq(&tau);
        let ric =
            lg.ricci() + lg.hessian(&tau) * ((n - 2.0) / t) + g * (lg.laplacian(&tau) / t - (n - 1.0) * q / (t * t));
        let dt = lg.differential(&tau);
        let df = lg.differential(&f);
        let cross = &dt * df.transpose() + &df * dt.transpose();
        let hf = lg.hessian(&f) + (cross - g * lg.grad_inner(&tau, &f)) / t;
        let e = orthonormal_frame(g)?;
        let r1 = frame_max(&e, &(lh.ricci() - &ric)) / frame_max(&e, lh.ricci()).max(1.0);
        let hh = lh.hessian(&fh);
        let r2 = frame_max(&e, &(&hh - &hf)) / frame_max(&e, &hh).max(1.0);
        Ok(vec![r1.max(r2)])
    });
    record("conformal-formulas", tol, c)
}
