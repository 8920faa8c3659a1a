use std::fmt::Write as _;
use std::sync::Arc;

use crate::ode::{OdeError, PhiProfile, Taylor2};

use super::quadrature::integrate;
use super::BuildError;

/// `Q(τ) = |∇τ|²` as a function of `τ`.
pub trait QProfile: Send + Sync {
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError>;
}

/// `Q = 2(τ − c)φ`
pub struct QFromPhi {
    pub c: f64,
    pub phi: Arc<dyn PhiProfile>,
}

impl QProfile for QFromPhi {
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError> {
        let lin = Taylor2::new(2.0 * (tau - self.c), 2.0, 0.0);
        Ok(lin * self.phi.eval(tau)?)
    }
}

pub fn q_from_phi(c: f64, phi: Arc<dyn PhiProfile>) -> QFromPhi {
    QFromPhi { c, phi }
}

/// `Q ≡ q0`
pub struct ConstantQ(pub f64);

impl QProfile for ConstantQ {
    fn eval(&self, _tau: f64) -> Result<Taylor2, OdeError> {
        Ok(Taylor2::constant(self.0))
    }
}

impl<T: QProfile + ?Sized> QProfile for Arc<T> {
    fn eval(&self, tau: f64) -> Result<Taylor2, OdeError> {
        (**self).eval(tau)
    }
}

/// How finely [`positivity_intervals`] scans each pole-free segment.
pub const SCAN_POINTS: usize = 2000;
/// Bisection accuracy for interval endpoints.
pub const ENDPOINT_TOL: f64 = 1e-12;

fn positive(q: &dyn QProfile, tau: f64) -> bool {
    matches!(q.eval(tau), Ok(t) if t.v > 0.0 && t.v.is_finite())
}

/// Maximal open subintervals of `(lo, hi)` on which `Q > 0`, after removing
/// the `poles`. Endpoints interior to a segment are located by bisection.
pub fn positivity_intervals(q: &dyn QProfile, lo: f64, hi: f64, poles: &[f64]) -> Result<Vec<(f64, f64)>, BuildError> {
    if !(lo < hi) {
        return Err(BuildError::Config(format!("empty search range [{lo}, {hi}]")));
    }
    let mut cuts: Vec<f64> = std::iter::once(lo)
        .chain(poles.iter().copied().filter(|&p| p > lo && p < hi))
        .chain(std::iter::once(hi))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for seg in cuts.windows(2) {
        out.extend(segment_intervals(q, seg[0], seg[1]));
    }
    if out.is_empty() {
        return Err(BuildError::NoPositiveInterval { lo, hi });
    }
    Ok(out)
}

fn segment_intervals(q: &dyn QProfile, a: f64, b: f64) -> Vec<(f64, f64)> {
    let n = SCAN_POINTS;
    let h = (b - a) / n as f64;
    // open segment: sample strictly inside
    let xs: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
    let inside = |i: usize| i > 0 && i < n;
    let pos: Vec<bool> = (0..=n).map(|i| inside(i) && positive(q, xs[i])).collect();
    let mut out = Vec::new();
    let mut i = 1;
    while i < n {
        if !pos[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && pos[i] {
            i += 1;
        }
        let end = i - 1;
        let left = if start == 1 && segment_edge_positive(q, a, xs[1]) {
            a
        } else {
            bisect_edge(q, xs[start - 1], xs[start])
        };
        let right = if end == n - 1 && segment_edge_positive(q, b, xs[n - 1]) {
            b
        } else {
            bisect_edge(q, xs[end + 1], xs[end])
        };
        out.push((left, right));
    }
    out
}

/// Q stays positive all the way from the first interior grid point towards
/// the segment end (a pole or the search boundary).
fn segment_edge_positive(q: &dyn QProfile, edge: f64, first: f64) -> bool {
    let mut x = first;
    for _ in 0..40 {
        x = 0.5 * (x + edge);
        if x == edge {
            break;
        }
        if !positive(q, x) {
            return false;
        }
    }
    true
}

/// Boundary between a non-positive point `out` and a positive point `inn`.
fn bisect_edge(q: &dyn QProfile, mut out: f64, mut inn: f64) -> f64 {
    while (out - inn).abs() > ENDPOINT_TOL * out.abs().max(1.0) {
        let mid = 0.5 * (out + inn);
        if mid == out || mid == inn {
            break;
        }
        if positive(q, mid) {
            inn = mid;
        } else {
            out = mid;
        }
    }
    0.5 * (out + inn)
}

/// Number of tabulation panels of a warp.
pub const PANELS: usize = 256;
/// Absolute quadrature target per panel.
pub const QUAD_TOL: f64 = 1e-12;

/// The profile `Q` on an interval together with `log r(τ) = ∫_{τ0}^{τ} b/Q`
/// and its inverse `τ(log r)`.
pub struct WarpProfile {
    q: Arc<dyn QProfile>,
    b: f64,
    interval: (f64, f64),
    working: (f64, f64),
    tau0: f64,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl std::fmt::Debug for WarpProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WarpProfile")
            .field("b", &self.b)
            .field("interval", &self.interval)
            .field("working", &self.working)
            .field("tau0", &self.tau0)
            .finish()
    }
}

/// Fraction of the interval trimmed from each side to form the working
/// interval.
pub const MARGIN: f64 = 0.05;

/// Builds the warp on the working interval `I` shrunk by [`MARGIN`] per side,
/// with base point `τ0` the midpoint of `I`.
pub fn build_warp(q: Arc<dyn QProfile>, b: f64, interval: (f64, f64)) -> Result<WarpProfile, BuildError> {
    let (lo, hi) = interval;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(BuildError::Config(format!("invalid interval ({lo}, {hi})")));
    }
    if b == 0.0 || !b.is_finite() {
        return Err(BuildError::Config("b must be finite and nonzero".into()));
    }
    let len = hi - lo;
    let working = (lo + MARGIN * len, hi - MARGIN * len);
    let tau0 = 0.5 * (lo + hi);
    let nodes: Vec<f64> = (0..=PANELS)
        .map(|i| working.0 + (working.1 - working.0) * i as f64 / PANELS as f64)
        .collect();
    for &t in &nodes {
        let qt = q.eval(t)?;
        if !(qt.v > 0.0) {
            return Err(BuildError::NonPositiveQ { tau: t, q: qt.v });
        }
    }
    let integrand = |t: f64| match q.eval(t) {
        Ok(v) => b / v.v,
        Err(_) => f64::NAN,
    };
    let mut cumulative = vec![0.0; PANELS + 1];
    for i in 0..PANELS {
        cumulative[i + 1] = cumulative[i] + integrate(&integrand, nodes[i], nodes[i + 1], QUAD_TOL / PANELS as f64)?;
    }
    // shift so that log r(τ0) = 0
    let i0 = PANELS / 2;
    let offset = cumulative[i0] + integrate(&integrand, nodes[i0], tau0, QUAD_TOL)?;
    for c in &mut cumulative {
        *c -= offset;
    }
    let increasing = b > 0.0;
    let monotone = cumulative
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
    if !monotone {
        return Err(BuildError::NonMonotone);
    }
    Ok(WarpProfile {
        q,
        b,
        interval,
        working,
        tau0,
        nodes,
        cumulative,
    })
}

impl WarpProfile {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn working_interval(&self) -> (f64, f64) {
        self.working
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn q(&self) -> &Arc<dyn QProfile> {
        &self.q
    }

    pub fn q_at(&self, tau: f64) -> Result<Taylor2, OdeError> {
        self.q.eval(tau)
    }

    /// Range of `log r` over the working interval, in increasing order.
    pub fn logr_range(&self) -> (f64, f64) {
        let (a, b) = (self.cumulative[0], self.cumulative[PANELS]);
        (a.min(b), a.max(b))
    }

    fn panel_of_tau(&self, tau: f64) -> usize {
        let h = (self.working.1 - self.working.0) / PANELS as f64;
        (((tau - self.working.0) / h).floor().max(0.0) as usize).min(PANELS - 1)
    }

    fn integrand(&self, t: f64) -> f64 {
        match self.q.eval(t) {
            Ok(v) => self.b / v.v,
            Err(_) => f64::NAN,
        }
    }

    /// `log r(τ)` for `τ` in the working interval.
    pub fn logr_of_tau(&self, tau: f64) -> Result<f64, BuildError> {
        let (lo, hi) = self.working;
        let slack = 1e-12 * (hi - lo);
        if !(tau >= lo - slack && tau <= hi + slack) {
            return Err(BuildError::OutsideWarp(tau));
        }
        let tau = tau.clamp(lo, hi);
        let i = self.panel_of_tau(tau);
        let f = |t: f64| self.integrand(t);
        Ok(self.cumulative[i] + integrate(&f, self.nodes[i], tau, QUAD_TOL)?)
    }

    /// `τ(log r)`: bracketing on the tabulated panels, bisection to 1e−12,
    /// then two Newton steps with `dτ/d log r = Q/b`.
    pub fn tau_of_logr(&self, logr: f64) -> Result<f64, BuildError> {
        let (lo, hi) = self.logr_range();
        let slack = 1e-12 * (hi - lo);
        if !(logr >= lo - slack && logr <= hi + slack) {
            return Err(BuildError::OutsideWarp(logr));
        }
        let logr = logr.clamp(lo, hi);
        let inc = self.b > 0.0;
        // panel with log r between cumulative[idx] and cumulative[idx + 1]
        let above = if inc {
            self.cumulative.partition_point(|&c| c <= logr)
        } else {
            self.cumulative.partition_point(|&c| c >= logr)
        };
        let idx = above.clamp(1, PANELS) - 1;
        let (mut a, mut b) = (self.nodes[idx], self.nodes[idx + 1]);
        // Bisection against the exact panel integral.
        let g = |t: f64| -> Result<f64, BuildError> {
            let f = |s: f64| self.integrand(s);
            let l = self.cumulative[idx] + integrate(&f, self.nodes[idx], t, QUAD_TOL)?;
            Ok(if inc { l - logr } else { logr - l })
        };
        while b - a > 1e-12 * a.abs().max(1.0) {
            let mid = 0.5 * (a + b);
            if mid == a || mid == b {
                break;
            }
            if g(mid)? < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let mut t = 0.5 * (a + b);
        for _ in 0..2 {
            let q = self.q.eval(t)?.v;
            let resid = g(t)?;
            let slope = (self.b / q).abs();
            let next = t - resid / slope;
            if next >= self.nodes[idx] && next <= self.nodes[idx + 1] {
                t = next;
            }
        }
        Ok(t)
    }

    /// `(τ, log r, Q)` rows at `n + 1` evenly spaced points of the working
    /// interval.
    pub fn export_csv(&self, n: usize) -> Result<String, BuildError> {
        let mut s = String::from("tau,log_r,Q\n");
        let (lo, hi) = self.working;
        for i in 0..=n {
            let tau = lo + (hi - lo) * i as f64 / n as f64;
            let l = self.logr_of_tau(tau)?;
            let q = self.q.eval(tau)?.v;
            writeln!(s, "{tau:.17e},{l:.17e},{q:.17e}").expect("write to String");
        }
        Ok(s)
    }
}
