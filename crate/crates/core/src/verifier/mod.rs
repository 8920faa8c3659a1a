//! Pointwise verification of geometric identities at sampled points, with
//! per-check residual statistics.
//!
//! Residuals of tensor identities are taken in a metric-orthonormal frame
//! and divided by the size of the terms being compared, so they measure lost
//! digits rather than coordinate scale.

mod checks;
mod report;
mod subject;

pub use checks::{
    check_conformal_formulas, check_kahler, check_killing, check_quasi_einstein, check_ricci_hessian, check_skr,
    check_warped_einstein_constant, frame_max, orthonormal_frame, split_frames, ConstantProfiles, RicciHessianProfile,
    SkrProfiles, RESAMPLE_STRIDE, RETRIES,
};
pub use report::{CheckRecord, CheckVerdict, Exclusion, VerificationReport};
pub use subject::{ConstructionSubject, FixtureSubject, Site, Subject};

use serde::Serialize;

use crate::builder::Construction;
use crate::geometry::LocalGeometry;

/// Default number of samples per check.
pub const DEFAULT_SAMPLES: usize = 200;

/// Pass thresholds, one per check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub kahler: f64,
    pub killing: f64,
    pub skr: f64,
    pub ricci_hessian: f64,
    pub quasi_einstein: f64,
    pub warped_einstein_constant: f64,
    pub conformal_formulas: f64,
    pub skr_constant: f64,
    pub gradient_norm: f64,
    pub laplacian: f64,
    pub block_structure: f64,
    pub horizontal_hessian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kahler: 1e-8,
            killing: 1e-8,
            skr: 1e-8,
            ricci_hessian: 1e-7,
            quasi_einstein: 1e-6,
            warped_einstein_constant: 1e-6,
            conformal_formulas: 1e-8,
            skr_constant: 1e-9,
            gradient_norm: 1e-8,
            laplacian: 1e-8,
            block_structure: 1e-9,
            horizontal_hessian: 1e-8,
        }
    }
}

impl Tolerances {
    /// Every tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kahler: self.kahler * factor,
            killing: self.killing * factor,
            skr: self.skr * factor,
            ricci_hessian: self.ricci_hessian * factor,
            quasi_einstein: self.quasi_einstein * factor,
            warped_einstein_constant: self.warped_einstein_constant * factor,
            conformal_formulas: self.conformal_formulas * factor,
            skr_constant: self.skr_constant * factor,
            gradient_norm: self.gradient_norm * factor,
            laplacian: self.laplacian * factor,
            block_structure: self.block_structure * factor,
            horizontal_hessian: self.horizontal_hessian * factor,
        }
    }
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(1.0)
}

/// Scalar identities of the profile on a built chart: `τ − Q/(2φ) = c`,
/// `|∇τ|² = Q`, `Δτ = 2mφ + 2(τ − c)φ′`, the block form of `g` and the
/// horizontal Hessian eigenvalue `φ`.
pub fn check_profile_identities(con: &Construction, seed: u64, samples: usize, tol: &Tolerances) -> Vec<CheckRecord> {
    let subject = ConstructionSubject::new(con, seed);
    let c = con.params.c_f64();
    let m = con.params.m as f64;
    let collected = checks::collect(&subject, samples, |site| {
        let lg = LocalGeometry::at(site.chart.as_ref(), &site.point).map_err(|e| e.to_string())?;
        let tau = lg
            .field(site.tau.as_ref().unwrap().as_ref())
            .map_err(|e| e.to_string())?;
        let t = tau.value();
        let phi = con.phi.eval(t).map_err(|e| e.to_string())?;
        let q = lg.grad_norm_sq(&tau);
        let q_profile = con.warp().q_at(t).map_err(|e| e.to_string())?.v;
        let constant = (t - q / (2.0 * phi.v) - c).abs() / c.abs().max(1.0);
        let grad = rel(q, q_profile);
        let lap = rel(lg.laplacian(&tau), 2.0 * m * phi.v + 2.0 * (t - c) * phi.d1);
        let block = site
            .bundle
            .as_ref()
            .ok_or("site has no bundle chart")?
            .block_residual(&site.point)
            .map_err(|e| e.to_string())?;
        let j = site.j.as_ref().unwrap().eval(&site.point.seed());
        let n = lg.dim();
        let jm = nalgebra::DMatrix::from_fn(n, n, |a, b| j[a * n + b].value());
        let (_, eh) = split_frames(lg.metric(), &lg.gradient(&tau), &jm)?;
        let hess = lg.hessian(&tau);
        let mut hh = 0.0f64;
        for k in 0..eh.ncols() {
            let x = eh.column(k);
            hh = hh.max(rel((x.transpose() * &hess * x)[(0, 0)], phi.v));
        }
        Ok(vec![constant, grad, lap, block, hh])
    });
    let names = [
        ("skr-constant", tol.skr_constant),
        ("gradient-norm", tol.gradient_norm),
        ("laplacian", tol.laplacian),
        ("block-structure", tol.block_structure),
        ("horizontal-hessian", tol.horizontal_hessian),
    ];
    names
        .iter()
        .enumerate()
        .map(|(k, &(name, t))| {
            let residuals: Vec<f64> = collected.values.iter().map(|(_, v)| v[k]).collect();
            CheckRecord::from_residuals(name, t, &residuals, collected.resampled, collected.exclusions.clone())
        })
        .collect()
}

/// The full suite on a built chart.
pub fn verify_construction(con: &Construction, seed: u64, samples: usize, tol: &Tolerances) -> VerificationReport {
    let subject = ConstructionSubject::new(con, seed);
    let p = &con.params;
    let a = p.a_f64();
    let lambda = p.lambda.to_f64();
    let mut checks = vec![
        check_kahler(&subject, samples, tol.kahler),
        check_killing(&subject, samples, tol.killing),
        check_skr(&subject, samples, tol.skr),
        check_ricci_hessian(&subject, &SkrProfiles(p.clone()), samples, tol.ricci_hessian),
        check_quasi_einstein(&subject, a, lambda, samples, tol.quasi_einstein),
        check_warped_einstein_constant(&subject, a, lambda, samples, tol.warped_einstein_constant),
        check_conformal_formulas(&subject, samples, tol.conformal_formulas),
    ];
    checks.extend(check_profile_identities(con, seed, samples, tol));
    VerificationReport {
        subject: subject.describe(),
        seed,
        samples,
        parameters: construction_parameters(con),
        checks,
    }
}

/// Parameter echo for reports.
pub fn construction_parameters(con: &Construction) -> Vec<(String, String)> {
    let p = &con.params;
    let mut out = vec![("m".to_string(), p.m.to_string())];
    out.extend(p.named().iter().map(|(k, v)| (k.to_string(), v.to_string())));
    out.push(("sign_phi".into(), p.sign_phi.to_string()));
    out.push(("base".into(), con.base.kind.to_string()));
    out.push(("s".into(), format!("{:e}", con.s())));
    out.push((
        "interval".into(),
        format!("({:e}, {:e})", con.interval.0, con.interval.1),
    ));
    let (lo, hi) = con.warp().working_interval();
    out.push(("working_interval".into(), format!("({lo:e}, {hi:e})")));
    out
}
