use std::sync::Arc;

use kummer::kummer::*;
use kummer::shapes::{AxialProfile, AxialRadial, ConicOfRevolution, PlanePiece, ShapeSpec};
use kummer::sphere::{norm, sub, ChartPoint, Dimension, ScalarField, SphereGrid, SymMat};
use proptest::prelude::*;

fn sphere(l: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::sphere(l).unwrap())
}

fn axial(axis: [f64; 3], c1: f64, rate: f64) -> AxialRadial {
    let profile = if rate == 0.0 { AxialProfile::Affine { c0: 1.0, c1 } } else { AxialProfile::Exp { scale: 1.0, rate } };
    AxialRadial::new(Dimension::Sphere, axis, profile).unwrap()
}

fn frame_diff(m: &kummer::sphere::PointMetric, a: &SymMat, b: &SymMat) -> f64 {
    m.to_frame(&a.sub(b)).max_abs()
}

#[test]
fn ellipsoid_mean_intensity_matches_the_focal_formula() {
    let grid = sphere(12);
    for ecc in [0.3, 0.5, 0.8] {
        let c = ConicOfRevolution::new(Dimension::Sphere, 1.0, ecc, [0.0, 0.6, 0.8]).unwrap();
        let a = c.second_focus().unwrap();
        let r = RadialHypersurface::from_function(&grid, Arc::new(c)).unwrap();
        for p in r.points() {
            let expected = 2.0 * p.rho() / norm(&sub(&p.position(), &a));
            assert!((p.s1_trace() - expected).abs() < 1e-11);
        }
    }
}

#[test]
fn flat_and_round_reflectors() {
    let grid = sphere(10);
    let r = RadialHypersurface::from_function(&grid, Arc::new(ConicOfRevolution::sphere(Dimension::Sphere, 2.0).unwrap())).unwrap();
    assert!(r.points().iter().all(|p| (p.s1_trace() - 2.0).abs() < 1e-13 && (p.sn_det() - 1.0).abs() < 1e-13));
    let plane = PlanePiece::new(Dimension::Sphere, [0.0, 0.0, -1.0], 1.0).unwrap();
    let r = RadialHypersurface::on_domain(&grid, Arc::new(plane)).unwrap();
    assert!(!r.is_empty() && r.len() < grid.len());
    assert!(r.points().iter().all(|p| (p.s1_trace() + 2.0).abs() < 1e-10));
    let para = ConicOfRevolution::new(Dimension::Sphere, 1.0, 1.0, [0.0, 0.0, 1.0]).unwrap();
    let r = RadialHypersurface::on_domain(&grid, Arc::new(para)).unwrap();
    for p in r.points() {
        assert!(p.s1_trace().abs() < 1e-10);
        let s = p.striction([1.0, 0.0]).unwrap();
        assert!(s.infinite && s.point.is_none());
    }
}

#[test]
fn hyperboloid_rays_diverge_from_the_second_focus() {
    let grid = sphere(10);
    let c = ConicOfRevolution::new(Dimension::Sphere, 1.0, 1.5, [0.0, 0.0, 1.0]).unwrap();
    let a = c.second_focus().unwrap();
    let r = RadialHypersurface::on_domain(&grid, Arc::new(c)).unwrap();
    for p in r.points() {
        let s = p.striction([0.3, 0.7]).unwrap();
        assert!(s.h < 0.0);
        assert!((s.h.abs() - norm(&sub(&p.position(), &a))).abs() < 1e-8 * (1.0 + s.h.abs()));
    }
}

#[test]
fn principal_directions_carry_signed_intensities() {
    let grid = sphere(8);
    let f = axial([0.2, -0.3, 0.93], 0.0, 0.4);
    let r = RadialHypersurface::from_function(&grid, Arc::new(f)).unwrap();
    for p in r.points() {
        let eig = p.kappa_frame().eigen();
        let l = p.metric.chol_inv_t;
        for k in 0..2 {
            let fv = eig.vectors[k];
            let v = [l[0][0] * fv[0] + l[0][1] * fv[1], l[1][0] * fv[0] + l[1][1] * fv[1]];
            let di = p.directional_intensity(v).unwrap();
            assert!((di.signed - eig.values[k]).abs() < 1e-10);
            assert!((di.unsigned - eig.values[k].abs()).abs() < 1e-10);
        }
        let di = p.directional_intensity([0.4, 1.1]).unwrap();
        assert!(di.signed.abs() <= di.unsigned + 1e-12);
    }
    assert!(matches!(r.point(0).directional_intensity([0.0, 0.0]), Err(kummer::Error::ZeroTangent)));
}

#[test]
fn characteristic_polynomial_in_terms_of_s_functions() {
    let grid = sphere(8);
    let r = RadialHypersurface::from_function(&grid, Arc::new(axial([1.0, 0.0, 0.0], 0.3, 0.0))).unwrap();
    for p in r.points() {
        let s = p.s_functions();
        for lambda in [-1.5, 0.0, 0.7, 3.0] {
            // det(λ − a) = λ² − S₁λ + S₂ and det(a − λ) agrees in dimension two
            let expected = lambda * lambda - s[0] * lambda + s[1];
            assert!((p.characteristic(lambda) - expected).abs() < 1e-10);
        }
    }
}

#[test]
fn analysis_fields_agree() {
    let grid = sphere(12);
    let rho = ScalarField::from_fn(&grid, |m| 1.0 + 0.2 * m.x[0] * m.x[1] + 0.1 * m.x[2]);
    let r = RadialHypersurface::from_field(&rho).unwrap();
    assert!(fundamental_forms(&r).det_defect() < 1e-12);
    let a = intensity_form(&r);
    let b = intensity_form_via_second_form(&r);
    assert!(a.kappa.max_abs_diff(&b.kappa) < 1e-12);
    assert!(principal_intensities(&r).sn_defect() < 1e-12);
    let mi = mean_intensity(&r);
    assert!(mi.max_disagreement() < 1e-10);
    assert!(mi.min() < 2.0 && mi.max() > 2.0);
    let w = rho.map(|v| -v.ln());
    let conf = conformal_intensity_form(&w);
    let via_exp = RadialHypersurface::exp_neg(&w).unwrap();
    for (k, p) in via_exp.points().iter().enumerate() {
        assert!(frame_diff(&p.metric, &p.kappa, &conf.kappa.values()[k]) < 1e-10);
    }
    let g = embed(&r);
    let refl = reflection_map(&r);
    for k in 0..r.len() {
        assert!((norm(&refl.gamma[k]) - 1.0).abs() < 1e-14);
        assert!((norm(&g.normals[k]) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn exports() {
    let grid = sphere(4);
    let r = RadialHypersurface::from_function(&grid, Arc::new(axial([0.0, 0.0, 1.0], 0.2, 0.0))).unwrap();
    let csv = spectrum_csv(&r).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "point,colatitude,longitude,rho,S1,S2,lambda1,lambda2");
    assert_eq!(csv.lines().count(), r.len() + 1);
    let t = tensor_json(&intensity_form(&r).kappa);
    let json = serde_json::to_string(&t).unwrap();
    let back: TensorExport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);
}

#[test]
fn shape_specs_from_json() {
    let s: ShapeSpec = serde_json::from_str(r#"{"kind": "ellipsoid", "ecc": 0.5}"#).unwrap();
    let shape = s.build(Dimension::Sphere).unwrap();
    assert_eq!(shape.as_conic().unwrap().ecc(), 0.5);
    let bad: ShapeSpec = serde_json::from_str(r#"{"kind": "ellipsoid", "ecc": 1.5}"#).unwrap();
    assert!(bad.build(Dimension::Sphere).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pointwise_identities(
        theta in 0.05f64..3.09, phi in 0.0f64..std::f64::consts::TAU,
        ax in -1.0f64..1.0, ay in -1.0f64..1.0,
        c1 in -0.6f64..0.6, rate in -1.0f64..1.0, lambda in 0.1f64..20.0,
    ) {
        let axis = [ax, ay, 0.5];
        let f = axial(axis, c1, rate);
        let m = ChartPoint::sphere(theta, phi).metric();
        let p = KummerPoint::new(m, f.jet(&m).unwrap());
        prop_assert!(frame_diff(&m, &p.kappa, &p.kappa_via_second_form()) < 1e-10);
        let q = KummerPoint::new(m, p.jet.scaled(lambda));
        prop_assert!(frame_diff(&m, &p.kappa, &q.kappa) < 1e-12);
        let lam = p.principal_intensities();
        let s = p.s_functions();
        prop_assert!((s[0] - lam[0] - lam[1]).abs() < 1e-10);
        prop_assert!((s[1] - p.sn_det()).abs() < 1e-10);
        prop_assert!((p.s1_trace() - p.mean_operator()).abs() < 1e-9);
        prop_assert!((p.jacobian() - p.sn_det().abs()).abs() < 1e-10);
        prop_assert!((norm(&p.gamma) - 1.0).abs() < 1e-14);
        let rel = (p.first_form().det() - p.first_form_det_formula()).abs() / p.first_form().det();
        prop_assert!(rel < 1e-12);
    }

    #[test]
    fn elementary_symmetric_matches_expansion(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let s = elementary_symmetric(&[a, b, c]);
        prop_assert!((s[0] - (a + b + c)).abs() < 1e-12);
        prop_assert!((s[1] - (a * b + a * c + b * c)).abs() < 1e-11);
        prop_assert!((s[2] - a * b * c).abs() < 1e-11);
    }
}

#[test]
fn log_jet_inverts_the_exponential() {
    let grid = sphere(8);
    let r = RadialHypersurface::from_function(&grid, Arc::new(axial([0.0, 0.6, 0.8], 0.0, 0.4))).unwrap();
    for p in r.points() {
        let back = p.jet.neg_log().exp_neg();
        assert!((back.rho - p.jet.rho).abs() < 1e-14);
        assert!((0..2).all(|i| (back.d[i] - p.jet.d[i]).abs() < 1e-13));
        assert!(back.hess.max_abs_diff(&p.jet.hess) < 1e-12);
    }
}
