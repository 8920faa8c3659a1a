use std::sync::Arc;

use kahler_qe::builder::*;
use kahler_qe::geometry::*;
use kahler_qe::ode::*;
use kahler_qe::rational::Number;

fn n(v: i64) -> Number {
    Number::int(v)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn branch(m: u32, a: Number, kind: BaseKind, c2: i64, sign: i8) -> (SkrParams, BaseModel) {
    let base = BaseModel::new(kind, (m - 1) as usize);
    let kappa = match kind {
        BaseKind::Flat => n(0),
        BaseKind::FubiniStudy => n(2 * m as i64),
    };
    let p = SkrParams::solution_branch(m, a, n(1), kappa, n(c2), sign).unwrap();
    (p, base)
}

fn params_with(m: u32, a: i64, c: i64, c1: f64, c2: f64) -> SkrParams {
    let mut p = SkrParams::general(m, n(a), n(c), Number::ratio(-1, 2 * c));
    p.c1 = Number::Float(c1);
    p.c2 = Number::Float(c2);
    p
}

#[test]
fn q_examples() {
    let q = q_from_phi(1.0, Arc::new(ConstantPhi(0.75)));
    assert_eq!(q.eval(1.0).unwrap().v, 0.0);
    for t in [1.5, 3.0, -2.0] {
        let v = q.eval(t).unwrap();
        assert!((v.v - 2.0 * (t - 1.0) * 0.75).abs() < 1e-15);
        assert_eq!(v.d1, 1.5);
        assert_eq!(v.v > 0.0, t > 1.0);
    }
    let p = params_with(2, 1, 1, 0.0, 1.0);
    let phi = PhiSolution::new(&p, 2.5).unwrap();
    let q = q_from_phi(1.0, Arc::new(phi));
    assert!((q.eval(2.0).unwrap().v - 32.0).abs() < 1e-12);
}

#[test]
fn positivity_constant_profile() {
    let q = q_from_phi(1.0, Arc::new(ConstantPhi(4.0 / 4.0)));
    let found = positivity_intervals(&q, -3.0, 5.0, &[0.0, 1.0]).unwrap();
    assert_eq!(found, vec![(1.0, 5.0)]);
    let q = q_from_phi(1.0, Arc::new(ConstantPhi(-1.0)));
    assert!(matches!(
        positivity_intervals(&q, 1.0, 5.0, &[]),
        Err(BuildError::NoPositiveInterval { .. })
    ));
}

#[test]
fn positivity_endpoints_bracket_sign_changes() {
    // m = 2, a = 1: φ = 1 − 0.01 τ⁴/(τ − 1)², zero where τ² − 10τ + 10 = 0.
    let p = params_with(2, 1, 1, 1.0, -0.01);
    let phi = Arc::new(PhiSolution::new(&p, 3.0).unwrap());
    let q = q_from_phi(1.0, phi);
    let found = positivity_intervals(&q, 1.0, 10.0, &[]).unwrap();
    assert_eq!(found.len(), 1);
    let (lo, hi) = found[0];
    let s15 = 15f64.sqrt();
    assert!((lo - (5.0 - s15)).abs() < 1e-10);
    assert!((hi - (5.0 + s15)).abs() < 1e-10);
    for (e, side) in [(lo, -1.0), (hi, 1.0)] {
        assert!(q.eval(e + side * 1e-6).unwrap().v < 0.0);
        assert!(q.eval(e - side * 1e-6).unwrap().v > 0.0);
    }
}

#[test]
fn constant_q_warp_is_logarithmic() {
    for b in [1.0, 2.5, -0.5] {
        let q0 = 3.0;
        let warp = build_warp(Arc::new(ConstantQ(q0)), b, (2.0, 6.0)).unwrap();
        assert_eq!(warp.tau0(), 4.0);
        let (lo, hi) = warp.working_interval();
        assert!((lo - 2.2).abs() < 1e-15 && (hi - 5.8).abs() < 1e-15);
        for i in 0..=20 {
            let tau = lo + (hi - lo) * i as f64 / 20.0;
            let l = warp.logr_of_tau(tau).unwrap();
            assert!((l - b * (tau - 4.0) / q0).abs() < 1e-12);
            assert!((warp.tau_of_logr(l).unwrap() - (4.0 + q0 / b * l)).abs() < 1e-12);
        }
    }
}

#[test]
fn warp_round_trip_and_derivative() {
    let (p, _) = branch(2, n(2), BaseKind::Flat, 1, 1);
    let phi = Arc::new(PhiSolution::new(&p, 3.0).unwrap());
    let q: Arc<dyn QProfile> = Arc::new(q_from_phi(1.0, phi));
    let warp = build_warp(q.clone(), 1.0, (2.0, 4.0)).unwrap();
    let (lo, hi) = warp.working_interval();
    let mut prev = f64::NEG_INFINITY;
    for i in 0..1000 {
        let tau = lo + (hi - lo) * (i as f64 + 0.5) / 1000.0;
        let l = warp.logr_of_tau(tau).unwrap();
        assert!(l > prev, "log r increasing for b > 0");
        prev = l;
        let back = warp.tau_of_logr(l).unwrap();
        assert!((back - tau).abs() < 1e-10, "round trip at {tau}: {back}");
    }
    for tau in [2.3, 2.9, 3.6] {
        let expect = 1.0 / q.eval(tau).unwrap().v;
        // step of about 1e-4 in τ
        let h = 1e-4 * expect;
        let l = warp.logr_of_tau(tau).unwrap();
        let dtau = (warp.tau_of_logr(l + h).unwrap() - warp.tau_of_logr(l - h).unwrap()) / (2.0 * h);
        assert!(rel(1.0 / dtau, expect) < 1e-7, "{} vs {expect}", 1.0 / dtau);
    }
    let csv = warp.export_csv(10).unwrap();
    assert!(csv.starts_with("tau,log_r,Q\n"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn warp_rejects_bad_input() {
    assert!(build_warp(Arc::new(ConstantQ(1.0)), 0.0, (1.0, 2.0)).is_err());
    assert!(build_warp(Arc::new(ConstantQ(-1.0)), 1.0, (1.0, 2.0)).is_err());
    let w = build_warp(Arc::new(ConstantQ(1.0)), 1.0, (1.0, 2.0)).unwrap();
    assert!(matches!(w.logr_of_tau(1.01), Err(BuildError::OutsideWarp(_))));
    assert!(w.tau_of_logr(10.0).is_err());
}

#[test]
fn zero_connection_double_is_a_product() {
    let warp = Arc::new(build_warp(Arc::new(ConstantQ(2.0)), 1.0, (2.0, 4.0)).unwrap());
    let chart = SkrChart::assemble(BaseModel::new(BaseKind::Flat, 1), warp, None, 1.0, 0.0).unwrap();
    let p = chart.point_at(&[0.2, -0.1], 3.0, 0.7).unwrap();
    let g = chart.components(&p.seed());
    for i in 0..2 {
        for j in 2..4 {
            assert_eq!(g[i * 4 + j].value(), 0.0);
            for k in 0..2 {
                assert_eq!(g[j * 4 + j].d(k), 0.0);
            }
        }
    }
    assert!((g[0].value() - 4.0).abs() < 1e-12);
}

#[test]
fn constant_q_vertical_block_at_unit_radius() {
    let q0 = 1.7;
    let warp = Arc::new(build_warp(Arc::new(ConstantQ(q0)), 1.0, (2.0, 4.0)).unwrap());
    let chart = SkrChart::assemble(BaseModel::new(BaseKind::Flat, 1), warp, None, 1.0, -1.0).unwrap();
    // x = 0 and τ = τ0 give ρ = 0 and log r = 0, so |w| = 1.
    let p = chart.point_at(&[0.0, 0.0], 3.0, 0.4).unwrap();
    assert!((p.coords()[2].hypot(p.coords()[3]) - 1.0).abs() < 1e-14);
    let g = chart.components(&p.seed());
    assert!((g[2 * 4 + 2].value() - q0).abs() < 1e-12);
    assert!((g[3 * 4 + 3].value() - q0).abs() < 1e-12);
    assert!(g[2 * 4 + 3].value().abs() < 1e-12);
    assert!((g[0].value() - 4.0).abs() < 1e-12);
}

#[test]
fn kahler_multiple_sign() {
    assert_eq!(kahler_curvature_multiple(1.0, 1.0), -1.0);
    assert_eq!(kahler_curvature_multiple(2.0, -1.0), 2.0);
    assert_eq!(kahler_curvature_multiple(-1.0, 1.0), 1.0);
}

#[test]
fn end_to_end_refuses_off_branch() {
    let mut p = SkrParams::general(2, n(1), n(1), n(1));
    p.b = n(1);
    let err = end_to_end(&p, BaseModel::new(BaseKind::Flat, 1), &BuildOptions::default())
        .err()
        .unwrap();
    match err {
        BuildError::Refused(msg) => assert!(msg.contains("2ck + 1 = 3"), "{msg}"),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn end_to_end_rejects_incompatible_data() {
    let (p, base) = branch(2, n(1), BaseKind::Flat, 1, 1);
    let opts = BuildOptions {
        s: Some(1.0),
        ..Default::default()
    };
    assert!(matches!(
        end_to_end(&p, base, &opts),
        Err(BuildError::IncompatibleCurvature(_))
    ));
    assert!(end_to_end(&p, BaseModel::new(BaseKind::FubiniStudy, 1), &Default::default()).is_err());
    assert!(end_to_end(&p, BaseModel::new(BaseKind::Flat, 2), &Default::default()).is_err());
    let opts = BuildOptions {
        s: Some(-1.0),
        ..Default::default()
    };
    assert!(end_to_end(&p, base, &opts).is_ok());
}

fn chart_invariants(m: u32, a: Number, kind: BaseKind, c2: i64, sign: i8) {
    let (p, base) = branch(m, a, kind, c2, sign);
    let con = end_to_end(&p, base, &BuildOptions::default()).unwrap();
    assert_eq!(con.s(), -(sign as f64));
    let smp = con.sampler(11);
    let j = con.chart.complex_structure();
    let c = p.c_f64();
    let d = base.real_dim();
    for i in 0..12 {
        let sp = smp.sample(i);
        let (chart, pt) = con.site(&sp).unwrap();
        let lg = LocalGeometry::at(chart.as_ref(), &pt).unwrap();
        let tau = lg.field(chart.tau_field().as_ref()).unwrap();
        let t = tau.value();
        assert!((t - sp.tau).abs() < 1e-10);
        let phi = con.phi.eval(t).unwrap();
        let q = con.warp().q_at(t).unwrap().v;
        assert!((t - q / (2.0 * phi.v) - c).abs() < 1e-9);
        assert!(rel(lg.grad_norm_sq(&tau), q) < 1e-8);
        let lap = 2.0 * m as f64 * phi.v + 2.0 * (t - c) * phi.d1;
        assert!(
            rel(lg.laplacian(&tau), lap) < 1e-8,
            "lap {} vs {lap} at tau = {t}",
            lg.laplacian(&tau)
        );
        assert!(chart.block_residual(&pt).unwrap() < 1e-9);
        let jj = j.eval(&pt.seed());
        let kr = lg.kahler_residual(&jj) / lg.christoffel().max_abs().max(1.0);
        assert!(kr < 1e-8, "nabla J = {kr:e} at tau = {t}");
        // ∇dτ on the horizontal lift of ∂x_1 equals φ g there
        let hess = lg.hessian(&tau);
        let g = lg.metric();
        let grad = lg.gradient(&tau);
        let jm = nalgebra::DMatrix::from_vec(d + 2, d + 2, StandardComplexStructure::matrix(d + 2)).transpose();
        let vs = [grad.clone(), &jm * &grad];
        let mut x = nalgebra::DVector::from_fn(d + 2, |k, _| if k == 0 { 1.0 } else { 0.0 });
        for v in &vs {
            let coef = v.dot(&(g * &x)) / v.dot(&(g * v));
            x -= v * coef;
        }
        let ratio = x.dot(&(&hess * &x)) / x.dot(&(g * &x));
        assert!(rel(ratio, phi.v) < 1e-8, "{ratio} vs {}", phi.v);
    }
}

#[test]
fn flat_base_chart_invariants() {
    chart_invariants(2, n(1), BaseKind::Flat, 1, 1);
    chart_invariants(2, n(2), BaseKind::Flat, -1, -1);
}

#[test]
fn fubini_study_chart_invariants() {
    chart_invariants(3, n(2), BaseKind::FubiniStudy, 1, 1);
    chart_invariants(3, Number::ratio(7, 2), BaseKind::FubiniStudy, 1, 1);
}

#[test]
fn interval_selection() {
    let ivs = [(-4.0, 0.0), (1.0, 2.0), (2.0, 4.0)];
    assert_eq!(select_interval(&ivs, 1.0, 1), Some((2.0, 4.0)));
    assert_eq!(select_interval(&ivs, 1.0, -1), Some((-4.0, 0.0)));
    assert_eq!(select_interval(&ivs[1..2], 1.0, -1), None);
}
