use std::sync::Arc;

use kahler_qe::builder::*;
use kahler_qe::geometry::fixtures::*;
use kahler_qe::geometry::*;
use kahler_qe::ode::*;
use kahler_qe::rational::Number;
use kahler_qe::verifier::*;

const N: usize = 60;

fn n(v: i64) -> Number {
    Number::int(v)
}

fn built(m: u32, a: i64, kind: BaseKind) -> Construction {
    let base = BaseModel::new(kind, (m - 1) as usize);
    let kappa = if kind == BaseKind::Flat { n(0) } else { n(2 * m as i64) };
    let p = SkrParams::solution_branch(m, n(a), n(1), kappa, n(1), 1).unwrap();
    end_to_end(&p, base, &BuildOptions::default()).unwrap()
}

fn j4() -> Arc<dyn ComplexStructure> {
    Arc::new(StandardComplexStructure::new(4))
}

fn flat_c2() -> FixtureSubject {
    FixtureSubject::new("C^2", Arc::new(euclidean(4)), vec![-1.0; 4], vec![1.0; 4], 3)
        .with_tau(Arc::new(field(|x: &[Jet2]| x[0] * x[0] + x[1] * x[1] + x[2] * 0.5)))
        .with_j(j4())
}

/// `C × CP¹` with `τ = x_1`: Kähler, `J∇τ = ∂y_1` is Killing, `∇dτ = 0`.
fn product_c_cp1() -> FixtureSubject {
    let chart = FnChart::new("C x CP^1", 4, |x: &[Jet2]| {
        let h = fubini_study_block(&x[2..4]);
        let mut g = vec![Jet2::constant(0.0); 16];
        g[0] = Jet2::constant(1.0);
        g[5] = Jet2::constant(1.0);
        g[10] = h[0];
        g[11] = h[1];
        g[14] = h[2];
        g[15] = h[3];
        g
    });
    FixtureSubject::new("C x CP^1", Arc::new(chart), vec![-1.0; 4], vec![1.0; 4], 5)
        .with_tau(Arc::new(field(|x: &[Jet2]| x[0])))
        .with_j(j4())
}

/// `S² × S²` in polar coordinates, Einstein with `r = g`.
fn sphere_product() -> FixtureSubject {
    let chart = FnChart::new("S^2 x S^2", 4, |x: &[Jet2]| {
        let mut g = vec![Jet2::constant(0.0); 16];
        g[0] = Jet2::constant(1.0);
        g[5] = x[0].sin() * x[0].sin();
        g[10] = Jet2::constant(1.0);
        g[15] = x[2].sin() * x[2].sin();
        g
    });
    FixtureSubject::new(
        "S^2 x S^2",
        Arc::new(chart),
        vec![0.3, -1.0, 0.3, -1.0],
        vec![2.8, 1.0, 2.8, 1.0],
        7,
    )
    .with_tau(Arc::new(field(|x: &[Jet2]| x[0].cos())))
}

#[test]
fn flat_fixture_is_kahler_with_killing_potential() {
    let s = flat_c2();
    assert_eq!(check_kahler(&s, N, 1e-10).verdict, CheckVerdict::Pass);
    assert_eq!(check_killing(&s, N, 1e-10).verdict, CheckVerdict::Pass);
}

#[test]
fn the_non_kahler_fixture_fails_with_its_pinned_residual() {
    let s = FixtureSubject::new(
        "perturbed",
        Arc::new(hermitian_perturbation()),
        vec![-1.0; 4],
        vec![1.0; 4],
        1,
    )
    .with_j(j4());
    let rec = check_kahler(&s, N, 1e-8);
    assert_eq!(rec.verdict, CheckVerdict::Fail);
    // |∇J| = e^{x2}/2, the largest Christoffel symbol is e^{x2}/2 as well
    // once it exceeds 1, so the relative residual is min(e^{x2}/2, 1).
    // |∇J| grows like e^{x2} and so does max|Γ|; the normalised residual
    // saturates at 1 where max|Γ| > 1.
    assert!((rec.max - 1.0).abs() < 1e-9, "{}", rec.max);
    assert!(rec.mean > 0.3 && rec.mean < 1.0);
}

#[test]
fn built_chart_kahler_and_killing() {
    let con = built(2, 1, BaseKind::Flat);
    let s = ConstructionSubject::new(&con, 9);
    let k = check_kahler(&s, N, 1e-8);
    let kil = check_killing(&s, N, 1e-8);
    assert_eq!(k.verdict, CheckVerdict::Pass, "{k:?}");
    assert_eq!(kil.verdict, CheckVerdict::Pass, "{kil:?}");
    assert_eq!(k.samples, N);
}

#[test]
fn skr_check_on_built_trivial_and_generic_charts() {
    let con = built(3, 2, BaseKind::FubiniStudy);
    let rec = check_skr(&ConstructionSubject::new(&con, 2), N, 1e-8);
    assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
    assert!(rec.notes.is_empty());

    let rec = check_skr(&product_c_cp1(), N, 1e-8);
    assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
    assert!(rec.notes.iter().any(|n| n.starts_with("trivial")));

    let generic = FixtureSubject::new(
        "quartic",
        Arc::new(quartic_kahler(0.3, 0.2, 0.1)),
        vec![-0.6; 4],
        vec![0.6; 4],
        4,
    )
    .with_tau(Arc::new(field(|x: &[Jet2]| {
        x[0] * x[0] + x[1] * x[1] + x[2] * x[2] * 2.0 + x[3] * x[3] * 2.0
    })))
    .with_j(j4());
    assert_eq!(check_kahler(&generic, N, 1e-8).verdict, CheckVerdict::Pass);
    assert_eq!(check_skr(&generic, N, 1e-8).verdict, CheckVerdict::Fail);
}

#[test]
fn ricci_hessian_on_einstein_product() {
    let s = sphere_product();
    let ok = check_ricci_hessian(&s, &ConstantProfiles { alpha: 0.0, gamma: 1.0 }, N, 1e-9);
    assert_eq!(ok.verdict, CheckVerdict::Pass, "{ok:?}");
    let bad = check_ricci_hessian(&s, &ConstantProfiles { alpha: 0.0, gamma: 1.1 }, N, 1e-9);
    assert_eq!(bad.verdict, CheckVerdict::Fail);
    assert!((bad.max - 0.1 / 1.1).abs() < 1e-9);
}

#[test]
fn ricci_hessian_on_built_chart_and_lambda_sensitivity() {
    let con = built(2, 1, BaseKind::Flat);
    let s = ConstructionSubject::new(&con, 4);
    let ok = check_ricci_hessian(&s, &SkrProfiles(con.params.clone()), N, 1e-7);
    assert_eq!(ok.verdict, CheckVerdict::Pass, "{ok:?}");
    let mut p = con.params.clone();
    p.lambda = Number::Float(p.lambda.to_f64() + 1e-3);
    let bad = check_ricci_hessian(&s, &SkrProfiles(p), N, 1e-7);
    assert_eq!(bad.verdict, CheckVerdict::Fail);
    assert!(bad.max > 100.0 * ok.max);
}

#[test]
fn quasi_einstein_on_built_chart() {
    for (m, a, kind) in [(2, 1, BaseKind::Flat), (3, 2, BaseKind::FubiniStudy)] {
        let con = built(m, a, kind);
        let s = ConstructionSubject::new(&con, 8);
        let rec = check_quasi_einstein(&s, a as f64, con.params.lambda.to_f64(), N, 1e-6);
        assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
    }
}

#[test]
fn quasi_einstein_fails_off_the_family() {
    let (m, a) = (2, 1);
    let p = SkrParams::solution_branch(m, n(a), n(1), n(0), n(1), 1).unwrap();
    let mut off = p.clone();
    off.c1 = Number::Float(1e-3);
    let phi: Arc<dyn PhiProfile> = Arc::new(PhiSolution::new(&off, 3.0).unwrap());
    let con = construct_with_profile(
        &p,
        BaseModel::new(BaseKind::Flat, 1),
        phi,
        (2.0, 4.0),
        &BuildOptions::default(),
    )
    .unwrap();
    let s = ConstructionSubject::new(&con, 8);
    let rec = check_quasi_einstein(&s, a as f64, p.lambda.to_f64(), N, 1e-6);
    assert_eq!(rec.verdict, CheckVerdict::Fail);
}

#[test]
fn constant_f_reduces_to_the_einstein_residual() {
    let sphere = || {
        FixtureSubject::new("S^2", Arc::new(round_sphere()), vec![0.3, -1.0], vec![2.8, 1.0], 2)
            .with_tau(Arc::new(constant_field(1.0)))
            .with_f(Arc::new(constant_field(1.0)))
    };
    let qe = check_quasi_einstein(&sphere(), 2.0, 0.5, N, 1e-6);
    let einstein = check_ricci_hessian(&sphere(), &ConstantProfiles { alpha: 0.0, gamma: 0.5 }, N, 1e-6);
    assert!((qe.max - einstein.max).abs() < 1e-12);
    assert!((qe.max - 0.5).abs() < 1e-9);
}

#[test]
fn warped_einstein_constant() {
    let sphere = FixtureSubject::new("S^2", Arc::new(round_sphere()), vec![0.3, -1.0], vec![2.8, 1.0], 2)
        .with_tau(Arc::new(constant_field(1.0)))
        .with_f(Arc::new(constant_field(2.0)));
    let rec = check_warped_einstein_constant(&sphere, 1.0, 0.25, N, 1e-12);
    assert_eq!(rec.verdict, CheckVerdict::Pass);
    assert_eq!(rec.max, 0.0);
    assert!(rec.notes[0].contains("mu(p0) = 1e0"));
    for (m, a, kind) in [(2, 1, BaseKind::Flat), (3, 2, BaseKind::FubiniStudy)] {
        let con = built(m, a, kind);
        let s = ConstructionSubject::new(&con, 6);
        let rec = check_warped_einstein_constant(&s, a as f64, con.params.lambda.to_f64(), N, 1e-6);
        assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
    }
    let skipped = check_warped_einstein_constant(&sphere, 3.5, 0.0, N, 1e-6);
    assert_eq!(skipped.verdict, CheckVerdict::Skipped);
}

#[test]
fn conformal_formulas_on_three_fixtures() {
    let constant = FixtureSubject::new("R^3", Arc::new(euclidean(3)), vec![-1.0; 3], vec![1.0; 3], 1)
        .with_tau(Arc::new(constant_field(2.0)))
        .with_f(Arc::new(field(|x: &[Jet2]| x[0] * x[1] + x[2].sin())));
    assert_eq!(check_conformal_formulas(&constant, N, 1e-8).verdict, CheckVerdict::Pass);
    let hyperbolic = FixtureSubject::new("R^2", Arc::new(euclidean(2)), vec![-1.0, 0.5], vec![1.0, 2.0], 1)
        .with_tau(Arc::new(field(|x: &[Jet2]| x[1])))
        .with_f(Arc::new(field(|x: &[Jet2]| x[0] * x[0] + x[1])));
    let rec = check_conformal_formulas(&hyperbolic, N, 1e-9);
    assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
    let con = built(2, 2, BaseKind::Flat);
    let rec = check_conformal_formulas(&ConstructionSubject::new(&con, 1), N, 1e-8);
    assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
}

#[test]
fn profile_identities_on_built_chart() {
    let con = built(3, 1, BaseKind::FubiniStudy);
    for rec in check_profile_identities(&con, 3, N, &Tolerances::default()) {
        assert_eq!(rec.verdict, CheckVerdict::Pass, "{rec:?}");
    }
}

#[test]
fn reports_are_deterministic() {
    let con = built(2, 2, BaseKind::Flat);
    let a = verify_construction(&con, 17, 20, &Tolerances::default());
    let b = verify_construction(&con, 17, 20, &Tolerances::default());
    assert_eq!(a, b);
    assert!(a.passed(), "{}", a.summary_table());
    let c = verify_construction(&con, 18, 20, &Tolerances::default());
    assert_ne!(a.checks[0].max, c.checks[0].max);
}

#[test]
fn failed_samples_are_resampled_then_excluded() {
    // the domain rejects the right half of the box, so about half the first
    // attempts fail and some samples run out of retries
    let chart = FnChart::new("half plane", 2, |_x: &[Jet2]| {
        vec![
            Jet2::constant(1.0),
            Jet2::constant(0.0),
            Jet2::constant(0.0),
            Jet2::constant(1.0),
        ]
    })
    .with_domain(|p: &ChartPoint| p.coords()[0] < 0.0);
    let s = FixtureSubject::new("half plane", Arc::new(chart), vec![-1.0; 2], vec![1.0; 2], 3)
        .with_j(Arc::new(StandardComplexStructure::new(2)));
    let rec = check_kahler(&s, 100, 1e-8);
    assert!(rec.resampled > 0);
    assert!(!rec.exclusions.is_empty());
    assert_eq!(rec.samples + rec.exclusions.len(), 100);
    assert_eq!(rec.verdict, CheckVerdict::Fail);
    assert!(rec.exclusions[0].reason.contains("outside"));
}

#[test]
fn tolerance_scaling() {
    let t = Tolerances::default().scaled(10.0);
    assert!((t.quasi_einstein / 1e-5 - 1.0).abs() < 1e-12);
    assert!((t.block_structure / 1e-8 - 1.0).abs() < 1e-12);
}
