//! Explicit metrics on the total space of a Hermitian line bundle over a
//! Kähler–Einstein base, minus the zero section, built from a solution `φ`
//! of the profile equations.

mod base;
mod chart;
pub mod quadrature;
mod sampler;
mod warp;

use std::sync::Arc;

pub use base::{BaseKind, BaseModel};
pub use chart::{kahler_curvature_multiple, SkrChart};
pub use quadrature::QuadratureError;
pub use sampler::{ChartSampler, Halton, SampleSpec, SAMPLE_MARGIN};
pub use warp::{
    build_warp, positivity_intervals, q_from_phi, ConstantQ, QFromPhi, QProfile, WarpProfile, ENDPOINT_TOL, MARGIN,
    PANELS, QUAD_TOL, SCAN_POINTS,
};

use crate::geometry::{ChartPoint, GeometryError, ScalarField};
use crate::ode::{OdeError, PhiProfile, PhiSolution, SkrParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("{0}")]
    Config(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error("no interval with Q > 0 in ({lo}, {hi})")]
    NoPositiveInterval { lo: f64, hi: f64 },
    #[error("Q({tau}) = {q} is not positive")]
    NonPositiveQ { tau: f64, q: f64 },
    #[error("log r is not monotone on the interval")]
    NonMonotone,
    #[error("{0} is outside the warp")]
    OutsideWarp(f64),
    #[error("chart dimension {0} is not supported")]
    Dimension(usize),
    #[error("curvature data incompatible: {0}")]
    IncompatibleCurvature(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Knobs of [`end_to_end`] that are not profile parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BuildOptions {
    /// Where to look for a positivity interval; defaults to `(−4|c|, 4|c|)`.
    pub search_range: Option<(f64, f64)>,
    /// Explicit curvature multiple; must equal the Kähler value if given.
    pub s: Option<f64>,
}

/// Everything produced by [`end_to_end`].
pub struct Construction {
    pub params: SkrParams,
    pub base: BaseModel,
    pub chart: Arc<SkrChart>,
    pub phi: Arc<dyn PhiProfile>,
    pub tau: Arc<dyn ScalarField>,
    /// `f = 1/τ + k` with `k = −1/(2c)`.
    pub f: Arc<dyn ScalarField>,
    /// All positivity intervals found, in increasing order.
    pub intervals: Vec<(f64, f64)>,
    /// The interval the warp was built on.
    pub interval: (f64, f64),
}

impl Construction {
    pub fn warp(&self) -> &WarpProfile {
        self.chart.warp()
    }

    pub fn s(&self) -> f64 {
        self.chart.s()
    }

    pub fn b(&self) -> f64 {
        self.chart.warp().b()
    }

    pub fn k(&self) -> f64 {
        self.params.k_f64()
    }

    /// The chart recentered at the sample's `τ` and the sample point in it.
    pub fn site(&self, spec: &SampleSpec) -> Result<(Arc<SkrChart>, ChartPoint), BuildError> {
        let chart = Arc::new(self.chart.recentered(&spec.base, spec.tau)?);
        let point = chart.point_at(&spec.base, spec.tau, spec.theta)?;
        Ok((chart, point))
    }

    /// Deterministic sampler over the chart's compact sampling box.
    pub fn sampler(&self, seed: u64) -> ChartSampler {
        ChartSampler::new(self.base.real_dim(), 0.5, self.warp().working_interval(), seed)
    }
}

/// Default search range `(−4|c|, 4|c|)`.
pub fn default_search_range(c: f64) -> (f64, f64) {
    (-4.0 * c.abs(), 4.0 * c.abs())
}

/// Positivity intervals of `Q = 2(τ − c)φ` on the pole-free segments of
/// `range`, each segment using the closed form on its own real branch.
pub fn profile_intervals(p: &SkrParams, range: (f64, f64)) -> Result<Vec<(f64, f64)>, BuildError> {
    let c = p.c_f64();
    let mut cuts: Vec<f64> = vec![range.0, range.1];
    cuts.extend([0.0, c, 2.0 * c].into_iter().filter(|&t| t > range.0 && t < range.1));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for seg in cuts.windows(2) {
        let phi = PhiSolution::new(p, 0.5 * (seg[0] + seg[1]))?;
        let q = QFromPhi { c, phi: Arc::new(phi) };
        match positivity_intervals(&q, seg[0], seg[1], &[]) {
            Ok(found) => out.extend(found),
            Err(BuildError::NoPositiveInterval { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(BuildError::NoPositiveInterval {
            lo: range.0,
            hi: range.1,
        });
    }
    Ok(out)
}

/// The longest interval on the side `sgn(τ − c) = sgn φ`.
pub fn select_interval(intervals: &[(f64, f64)], c: f64, sign_phi: i8) -> Option<(f64, f64)> {
    intervals
        .iter()
        .copied()
        .filter(|&(lo, hi)| (0.5 * (lo + hi) - c).signum() == sign_phi as f64)
        .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
}

/// Validates the solution family, builds `Q`, the warp and the chart, and
/// returns them with `f = 1/τ − 1/(2c)`.
pub fn end_to_end(params: &SkrParams, base: BaseModel, options: &BuildOptions) -> Result<Construction, BuildError> {
    params.validate_solution_branch().map_err(|e| match e {
        OdeError::NotSolutionBranch(msg) => BuildError::Refused(msg),
        other => BuildError::Ode(other),
    })?;
    let m = params.m as usize;
    if base.complex_dim + 1 != m {
        return Err(BuildError::Config(format!(
            "base of complex dimension {} does not match m = {m}",
            base.complex_dim
        )));
    }
    let kappa = params.kappa.to_f64();
    if (kappa - base.kappa()).abs() > 1e-12 * kappa.abs().max(1.0) {
        return Err(BuildError::IncompatibleCurvature(format!(
            "kappa = {kappa} but the {} base has Einstein constant {}",
            base.kind,
            base.kappa()
        )));
    }
    let c = params.c_f64();
    let b = params.b.to_f64();
    let range = options.search_range.unwrap_or_else(|| default_search_range(c));
    let intervals = profile_intervals(params, range)?;
    let interval = select_interval(&intervals, c, params.sign_phi).ok_or_else(|| {
        BuildError::Config(format!(
            "no positivity interval with sgn(tau - c) = {} in ({}, {})",
            params.sign_phi, range.0, range.1
        ))
    })?;
    let phi = Arc::new(PhiSolution::new(params, 0.5 * (interval.0 + interval.1))?);
    let (wlo, whi) = (
        interval.0 + MARGIN * (interval.1 - interval.0),
        interval.1 - MARGIN * (interval.1 - interval.0),
    );
    phi.check_sign(wlo, whi, 200, params.sign_phi)?;
    let side = params.sign_phi as f64;
    let s = kahler_curvature_multiple(b, side);
    if let Some(given) = options.s {
        if given != s {
            return Err(BuildError::IncompatibleCurvature(format!(
                "s = {given} gives a non-Kähler metric; with b = {b} on the side sgn(tau - c) = {side} it must be {s}"
            )));
        }
    }
    let mut con = construct_with_profile(params, base, phi, interval, options)?;
    con.intervals = intervals;
    Ok(con)
}

/// Builds the chart for an arbitrary profile `φ` on `interval`, without
/// checking that `φ` solves the profile equations. The curvature multiple is
/// the Kähler value unless `options.s` overrides it.
pub fn construct_with_profile(
    params: &SkrParams,
    base: BaseModel,
    phi: Arc<dyn PhiProfile>,
    interval: (f64, f64),
    options: &BuildOptions,
) -> Result<Construction, BuildError> {
    let c = params.c_f64();
    let b = params.b.to_f64();
    let side = if 0.5 * (interval.0 + interval.1) > c { 1.0 } else { -1.0 };
    let s = options.s.unwrap_or_else(|| kahler_curvature_multiple(b, side));
    let q: Arc<dyn QProfile> = Arc::new(QFromPhi { c, phi: phi.clone() });
    let warp = Arc::new(build_warp(q, b, interval)?);
    let chart = Arc::new(SkrChart::assemble(base, warp, Some(phi.clone()), c, s)?);
    let tau = chart.tau_field();
    let f = chart.f_field(params.k_f64());
    Ok(Construction {
        params: params.clone(),
        base,
        chart,
        phi,
        tau,
        f,
        intervals: vec![interval],
        interval,
    })
}
