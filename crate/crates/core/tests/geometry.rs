use std::f64::consts::PI;
use std::sync::Arc;

use kahler_qe::geometry::fixtures::*;
use kahler_qe::geometry::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(c: &[f64]) -> ChartPoint {
    ChartPoint::new(c.to_vec()).unwrap()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

#[test]
fn euclidean_christoffels_vanish() {
    let g = euclidean(3);
    let gam = christoffel(&g, &pt(&[0.3, -1.0, 2.0])).unwrap();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(gam.get(k, i, j), 0.0);
            }
        }
    }
}

#[test]
fn sphere_christoffels() {
    let g = round_sphere();
    let gam = christoffel(&g, &pt(&[PI / 4.0, 0.7])).unwrap();
    assert!((gam.get(0, 1, 1) + 0.5).abs() < 1e-14);
    assert!((gam.get(1, 0, 1) - 1.0).abs() < 1e-14);
    assert!((gam.get(1, 1, 0) - 1.0).abs() < 1e-14);
    assert!(gam.get(0, 0, 0).abs() < 1e-14);
}

#[test]
fn exp_conformal_christoffels() {
    let g = exp_conformal_plane();
    let gam = christoffel(&g, &pt(&[0.0, 0.4])).unwrap();
    let expect = |k, i, j| match (k, i, j) {
        (0, 0, 0) => 1.0,
        (0, 1, 1) => -1.0,
        (1, 0, 1) | (1, 1, 0) => 1.0,
        _ => 0.0,
    };
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                assert!((gam.get(k, i, j) - expect(k, i, j)).abs() < 1e-14, "{k}{i}{j}");
            }
        }
    }
}

#[test]
fn constant_curvature_ricci() {
    let s = round_sphere();
    for th in [0.3, 1.0, 2.5] {
        let p = pt(&[th, 1.1]);
        let geo = LocalGeometry::at(&s, &p).unwrap();
        assert!(max_abs(&(geo.ricci() - geo.metric())) < 1e-12);
        assert!((geo.scalar_curvature() - 2.0).abs() < 1e-12);
    }
    let h = hyperbolic_plane();
    for p in [pt(&[0.0, 1.0]), pt(&[2.0, 0.3])] {
        let geo = LocalGeometry::at(&h, &p).unwrap();
        assert!(max_abs(&(geo.ricci() + geo.metric())) < 1e-10);
    }
    let r = ricci(&euclidean(4), &pt(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    assert_eq!(max_abs(&r), 0.0);
}

#[test]
fn fubini_study_is_einstein_and_kahler() {
    for k in 1..=3 {
        let g = fubini_study(k);
        let j = StandardComplexStructure::new(2 * k);
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..10 {
            let p = pt(&(0..2 * k).map(|_| rng.random_range(-1.5..1.5)).collect::<Vec<_>>());
            let geo = LocalGeometry::at(&g, &p).unwrap();
            let kappa = fubini_study_einstein_constant(k);
            assert!(max_abs(&(geo.ricci() - geo.metric() * kappa)) < 1e-10);
            assert!(kahler_residual(&g, &j, &p).unwrap() < 1e-10);
            let (sq, herm) = geo.complex_structure_defect(&j.eval(&p.seed()));
            assert!(sq < 1e-12 && herm < 1e-12);
        }
    }
}

#[test]
fn hermitian_perturbation_is_not_kahler() {
    let g = hermitian_perturbation();
    let j = StandardComplexStructure::new(4);
    let p = pt(&[0.3, -0.2, 0.4, 0.1]);
    let res = kahler_residual(&g, &j, &p).unwrap();
    // largest entry of ∇J is e^{x_2}/2
    assert!((res - 0.4f64.exp() / 2.0).abs() < 1e-13, "{res}");
    assert!(res > 0.1);
    let geo = LocalGeometry::at(&g, &p).unwrap();
    let (sq, herm) = geo.complex_structure_defect(&j.eval(&p.seed()));
    assert!(sq < 1e-12 && herm < 1e-12);
}

#[test]
fn quartic_potential_is_kahler() {
    let g = quartic_kahler(0.3, 0.2, -0.1);
    let j = StandardComplexStructure::new(4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let p = pt(&(0..4).map(|_| rng.random_range(-0.6..0.6)).collect::<Vec<_>>());
        assert!(kahler_residual(&g, &j, &p).unwrap() < 1e-12);
    }
}

#[test]
fn hessian_examples() {
    let e = euclidean(2);
    let p = pt(&[0.7, -0.2]);
    let h = hessian(&e, &field(|x: &[Jet2]| x[0] * x[0]), &p).unwrap();
    assert_eq!(h[(0, 0)], 2.0);
    assert_eq!(h[(0, 1)] + h[(1, 0)] + h[(1, 1)], 0.0);
    let h = hessian(&e, &field(|x: &[Jet2]| x[0] * 3.0 - x[1] + 1.0), &p).unwrap();
    assert_eq!(max_abs(&h), 0.0);

    let s = round_sphere();
    for th in [0.4, 1.3, 2.9] {
        let p = pt(&[th, 0.2]);
        let geo = LocalGeometry::at(&s, &p).unwrap();
        let t = geo.field(&field(|x: &[Jet2]| x[0].cos())).unwrap();
        let diff = geo.hessian(&t) + geo.metric() * th.cos();
        assert!(max_abs(&diff) < 1e-14);
        let c = geo.field(&constant_field(2.5)).unwrap();
        assert_eq!(max_abs(&geo.hessian(&c)), 0.0);
    }
}

#[test]
fn gradient_and_laplacian_examples() {
    let e = euclidean(2);
    let p = pt(&[0.6, -1.1]);
    let tau = field(|x: &[Jet2]| x[0] * x[0] + x[1] * x[1]);
    let r2 = 0.6f64 * 0.6 + 1.1 * 1.1;
    assert!((grad_norm_sq(&e, &tau, &p).unwrap() - 4.0 * r2).abs() < 1e-13);
    assert!((laplacian(&e, &tau, &p).unwrap() - 4.0).abs() < 1e-14);
    let c = constant_field(3.0);
    assert_eq!(grad_norm_sq(&e, &c, &p).unwrap(), 0.0);
    assert_eq!(laplacian(&e, &c, &p).unwrap(), 0.0);
}

#[test]
fn killing_examples() {
    let g = euclidean(2);
    let j = StandardComplexStructure::new(2);
    let p = pt(&[0.8, -0.3]);
    let rot = field(|x: &[Jet2]| (x[0] * x[0] + x[1] * x[1]) * 0.5);
    assert!(max_abs(&killing_residual(&g, &rot, &j, &p).unwrap()) < 1e-15);
    let tr = field(|x: &[Jet2]| x[0]);
    assert_eq!(max_abs(&killing_residual(&g, &tr, &j, &p).unwrap()), 0.0);
    // τ = x²: K = J∇τ = 2x ∂_y, so L_K g has dx⊗dy + dy⊗dx coefficient 2
    let sq = field(|x: &[Jet2]| x[0] * x[0]);
    let res = killing_residual(&g, &sq, &j, &p).unwrap();
    assert!((res[(0, 1)] - 2.0).abs() < 1e-14 && (res[(1, 0)] - 2.0).abs() < 1e-14);
    assert_eq!(res[(0, 0)], 0.0);
}

#[test]
fn fubini_study_killing_potential() {
    // |z|²/(1+|z|²) generates the rotation of CP^1
    let g = fubini_study(1);
    let j = StandardComplexStructure::new(2);
    let tau = field(|x: &[Jet2]| {
        let r = x[0] * x[0] + x[1] * x[1];
        r / (r + 1.0)
    });
    for p in [pt(&[0.2, 0.9]), pt(&[-1.3, 0.4])] {
        assert!(max_abs(&killing_residual(&g, &tau, &j, &p).unwrap()) < 1e-13);
    }
}

#[test]
fn bianchi_and_compatibility_on_random_metrics() {
    for seed in 0..5u64 {
        let g = RandomPolynomialMetric::new(4, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        for _ in 0..50 {
            let p = pt(&(0..4).map(|_| rng.random_range(-0.45..0.45)).collect::<Vec<_>>());
            let geo = LocalGeometry::at(&g, &p).unwrap();
            assert!(geo.first_bianchi_defect() < 1e-9);
            assert!(geo.metric_compatibility_defect() < 1e-10);
            let r = geo.ricci();
            assert!(max_abs(&(r - r.transpose())) < 1e-10);
            let gam = geo.christoffel();
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..i {
                        assert!((gam.get(k, i, j) - gam.get(k, j, i)).abs() < 1e-14);
                    }
                }
            }
        }
    }
}

#[test]
fn oracle_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let charts: Vec<(Box<dyn MetricChart>, f64)> = vec![
        (Box::new(round_sphere()), 1.0),
        (Box::new(hyperbolic_plane()), 1.0),
        (Box::new(fubini_study(2)), 1.0),
        (Box::new(quartic_kahler(0.3, 0.2, -0.1)), 0.8),
        (Box::new(hermitian_perturbation()), 1.0),
        (Box::new(RandomPolynomialMetric::new(4, 1)), 0.4),
    ];
    for (g, r) in &charts {
        for _ in 0..10 {
            let p = pt(&(0..g.dim()).map(|_| 1.5 + rng.random_range(-r..*r)).collect::<Vec<_>>());
            let p = if g.contains(&p) {
                p
            } else {
                pt(&(0..g.dim())
                    .map(|_| rng.random_range(-r * 0.5..r * 0.5))
                    .collect::<Vec<_>>())
            };
            assert!(
                metric_derivative_defect(g.as_ref(), &p, 1e-4) < 1e-5,
                "{}",
                g.describe()
            );
        }
    }
    let f = random_quadratic_field(3, 2);
    assert!(field_derivative_defect(&f, &pt(&[0.1, 0.2, -0.3]), 1e-4) < 1e-5);
}

#[test]
fn conformal_scaling() {
    let e: Arc<dyn MetricChart> = Arc::new(euclidean(2));
    let p = pt(&[0.3, 0.5]);
    // τ = y turns the flat plane into (dx² + dy²)/y²
    let hyp = conformal_scale(e.clone(), Arc::new(field(|x: &[Jet2]| x[1])), std::slice::from_ref(&p)).unwrap();
    let geo = LocalGeometry::at(&hyp, &p).unwrap();
    assert!(max_abs(&(geo.ricci() + geo.metric())) < 1e-12);

    let s: Arc<dyn MetricChart> = Arc::new(round_sphere());
    let q = pt(&[1.0, 0.0]);
    let scaled = conformal_scale(s.clone(), Arc::new(constant_field(3.0)), std::slice::from_ref(&q)).unwrap();
    let a = ricci(&scaled, &q).unwrap();
    let b = ricci(s.as_ref(), &q).unwrap();
    assert!(max_abs(&(a - b)) < 1e-14);

    let zero = conformal_scale(e, Arc::new(field(|x: &[Jet2]| x[1])), &[pt(&[1.0, 0.0])]);
    assert!(matches!(zero, Err(GeometryError::ZeroConformalFactor)));
    assert!(!hyp.contains(&pt(&[1.0, 0.0])));
}

#[test]
fn conformal_ricci_expansion_on_random_metrics() {
    // r̂ = r + (n−2)τ⁻¹∇dτ + [τ⁻¹Δτ − (n−1)τ⁻²Q] g for ĝ = g/τ²
    let n = 4;
    for seed in 0..3u64 {
        let g: Arc<dyn MetricChart> = Arc::new(RandomPolynomialMetric::new(n, seed));
        let tau: Arc<dyn ScalarField> = Arc::new(field(|x: &[Jet2]| (x[0] - x[1] * x[2] * 0.5 + x[3] * x[3]).exp()));
        let hat = ConformalChart::new(g.clone(), tau.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 40);
        for _ in 0..10 {
            let p = pt(&(0..n).map(|_| rng.random_range(-0.4..0.4)).collect::<Vec<_>>());
            let geo = LocalGeometry::at(g.as_ref(), &p).unwrap();
            let t = geo.field(tau.as_ref()).unwrap();
            let tv = t.value();
            let q = geo.grad_norm_sq(&t);
            let expect = geo.ricci()
                + geo.hessian(&t) * ((n as f64 - 2.0) / tv)
                + geo.metric() * (geo.laplacian(&t) / tv - (n as f64 - 1.0) * q / (tv * tv));
            let got = ricci(&hat, &p).unwrap();
            let scale = max_abs(&expect).max(1.0);
            assert!(max_abs(&(got - expect)) / scale < 1e-10);
        }
    }
}

#[test]
fn domain_and_definiteness_guards() {
    let s = round_sphere();
    assert!(matches!(
        LocalGeometry::at(&s, &pt(&[-0.1, 0.0])),
        Err(GeometryError::OutsideDomain)
    ));
    assert!(matches!(
        LocalGeometry::at(&s, &pt(&[1.0])),
        Err(GeometryError::DimensionMismatch { .. })
    ));
    let bad = FnChart::new("indefinite", 2, |x: &[Jet2]| {
        vec![x[0], Jet2::constant(0.0), Jet2::constant(0.0), Jet2::constant(1.0)]
    });
    assert!(matches!(
        LocalGeometry::at(&bad, &pt(&[-1.0, 0.0])),
        Err(GeometryError::NotPositiveDefinite { .. })
    ));
    let asym = FnChart::new("asym", 2, |_x: &[Jet2]| {
        [1.0, 0.5, 0.0, 1.0].into_iter().map(Jet2::constant).collect()
    });
    assert!(matches!(
        LocalGeometry::at(&asym, &pt(&[0.0, 0.0])),
        Err(GeometryError::NotSymmetric)
    ));
    assert!(ChartPoint::new(vec![f64::NAN]).is_err());
}
