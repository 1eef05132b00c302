use std::sync::Arc;

use kummer::kummer::RadialHypersurface;
use kummer::raytrace::ray_rng;
use kummer::solver::*;
use kummer::sphere::{apply_shifted_laplacian, gradient, Dimension, ScalarField, SphereGrid};
use rand::Rng;

fn circle(m: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::circle(m).unwrap())
}

fn sphere(l: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::sphere(l).unwrap())
}

fn problem(dim: Dimension, g: SourceTerm) -> AnnulusProblem {
    AnnulusProblem::new(dim, 0.5, 2.0, g).unwrap()
}

fn random_start(grid: &Arc<SphereGrid>, seed: u64, lo: f64, hi: f64) -> ScalarField {
    let mut rng = ray_rng(seed, 0);
    let c: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo) * 0.9;
    ScalarField::from_fn(grid, |m| {
        let x = m.x;
        let s = c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[0] * x[1] + c[4] * (x[0] * x[0] - x[1] * x[1]) + c[5];
        mid + half * (s / 6.0).tanh()
    })
}

#[test]
fn q_t_at_zero_is_the_model_term() {
    let grid = circle(64);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let cfg = HomotopyConfig::default();
    let rb = cfg.r_bar(&p);
    let q = rhs_q_t(&ScalarField::constant(&grid, 1.0 / rb), 0.0, &p, &cfg).unwrap();
    for v in q.values() {
        assert!((v - 0.5 / rb).abs() < 1e-15);
    }
    let q1 = rhs_q_t(&ScalarField::constant(&grid, 1.3), 1.0, &p, &cfg).unwrap();
    for v in q1.values() {
        assert!((v - 0.5 * 1.3).abs() < 1e-14);
    }
}

#[test]
fn q_one_matches_the_v_identity() {
    let grid = sphere(16);
    let p = problem(Dimension::Sphere, SourceTerm::custom(|x, r| 1.0 + 0.2 * x[2] / r));
    let cfg = HomotopyConfig::default();
    let v = ScalarField::from_fn(&grid, |m| 1.0 + 0.2 * m.x[0] - 0.1 * m.x[2] * m.x[1]);
    let q = rhs_q_t(&v, 1.0, &p, &cfg).unwrap();
    // n|∇v|²/(2v) + V ḡ(x, 1/v) written out directly
    let g2 = gradient(&v).norm2();
    for k in 0..v.len() {
        let vv = v.values()[k];
        let big_v = (g2[k] + vv * vv) / (2.0 * vv);
        let m = grid.metric().at(k);
        let gbar = 2.0 * (1.0 + 0.2 * m.x[2] * vv);
        let rhs = 2.0 * g2[k] / (2.0 * vv) + big_v * gbar;
        assert!((q.values()[k] - rhs).abs() < 1e-12);
    }
}

#[test]
fn linear_step_inverts_the_shifted_laplacian() {
    let grid = sphere(12);
    let p = problem(Dimension::Sphere, SourceTerm::Power { scale: 1.0, exponent: -1.0 });
    let cfg = HomotopyConfig::default();
    let w = ScalarField::from_fn(&grid, |m| 1.0 + 0.1 * m.x[1]);
    let v = linear_step_t(&w, 0.4, &p, &cfg).unwrap();
    let back = apply_shifted_laplacian(&v);
    let q = rhs_q_t(&w, 0.4, &p, &cfg).unwrap().projected();
    for (a, b) in back.values().iter().zip(q.values()) {
        assert!((a - b).abs() < 1e-10);
    }
    let w0 = ScalarField::constant(&grid, 1.0);
    let t0 = linear_step_t(&w0, 0.0, &p, &cfg).unwrap();
    assert!(t0.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
}

#[test]
fn picard_at_zero_finds_the_model_solution() {
    let grid = circle(256);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let cfg = HomotopyConfig::default();
    for seed in 0..5 {
        let w0 = random_start(&grid, seed, 0.5, 2.0);
        let out = picard_at_t(&w0, 0.0, &p, &cfg).unwrap();
        assert!(out.converged, "seed {seed}: {:?}", (out.iterations, out.step, out.residual));
        let err = out.w.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "seed {seed}: error {err}");
    }
}

#[test]
fn unshifted_picard_diverges_at_zero() {
    let grid = circle(64);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let cfg = HomotopyConfig { shift: PicardShift::None, ..Default::default() };
    let w0 = ScalarField::from_fn(&grid, |m| 1.0 + 0.01 * m.x[0] + 0.01);
    let out = picard_at_t(&w0, 0.0, &p, &cfg).unwrap();
    assert!(!out.converged);
    assert!(out.diverged);
}

#[test]
fn constant_source_gives_a_sphere() {
    let grid = circle(128);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let cfg = HomotopyConfig::default();
    let st = homotopy_solve(&p, &cfg, &grid).unwrap();
    assert!(st.converged(), "{:?}", st.status);
    let r = RadialHypersurface::from_field(&st.rho).unwrap();
    let bounds = mean_intensity_bounds_check(&r, 1e-6).unwrap();
    assert!((bounds.min - 1.0).abs() < 1e-8 && (bounds.max - 1.0).abs() < 1e-8, "{bounds:?}");
    assert!(bounds.passed);
}

#[test]
fn inverse_power_source_gives_the_mean_radius() {
    for grid in [circle(128), sphere(12)] {
        let dim = grid.dimension();
        let p = problem(dim, SourceTerm::Power { scale: 1.0, exponent: -1.0 });
        let cfg = HomotopyConfig::default();
        let st = homotopy_solve(&p, &cfg, &grid).unwrap();
        assert!(st.converged());
        let err = st.rho.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{dim:?}: {err}");
        assert_eq!(st.barrier, BarrierClass::StrictlyInterior);
    }
}

#[test]
fn manufactured_solution_on_the_circle() {
    let grid = circle(512);
    let g = SourceTerm::manufactured(Dimension::Circle, 1.0, 0.1, [1.0, 0.0, 0.0]).unwrap();
    let exact = *g.exact_solution().unwrap();
    let p = problem(Dimension::Circle, g);
    let cfg = HomotopyConfig::default();
    let st = homotopy_solve(&p, &cfg, &grid).unwrap();
    assert!(st.converged(), "{:?}", st.status);
    let err = st
        .rho
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| (v / exact.value(&grid.ambient(k)) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "relative error {err}");
    let r = RadialHypersurface::reciprocal(&st.w).unwrap();
    let res = residual(&r, &p).unwrap();
    assert!(res.sup_direct < 1e-6 && res.sup_v_form < 1e-6, "{} {}", res.sup_direct, res.sup_v_form);
    assert_eq!(st.barrier, BarrierClass::StrictlyInterior);
}

#[test]
fn residual_detects_non_solutions() {
    let grid = sphere(8);
    let unit = RadialHypersurface::from_field(&ScalarField::constant(&grid, 1.0)).unwrap();
    let ok = residual(&unit, &problem(Dimension::Sphere, SourceTerm::Constant { value: 1.0 })).unwrap();
    assert!(ok.sup_direct < 1e-12 && ok.sup_v_form < 1e-12, "{} {}", ok.sup_direct, ok.sup_v_form);
    let bad = residual(&unit, &problem(Dimension::Sphere, SourceTerm::Constant { value: 1.5 })).unwrap();
    assert!((bad.sup_direct - 1.0).abs() < 1e-12);
    assert!((bad.sup_v_form - 0.5).abs() < 1e-12);
    let wobbly = RadialHypersurface::from_field(&ScalarField::from_fn(&grid, |m| 1.0 + 0.2 * m.x[0] * m.x[2])).unwrap();
    let w = residual(&wobbly, &problem(Dimension::Sphere, SourceTerm::custom(|x, r| 1.0 + x[1] * r))).unwrap();
    assert!(w.consistency < 1e-12, "{}", w.consistency);
}

#[test]
fn hypothesis_examples() {
    let grid = sphere(8);
    let strict = hypothesis_check(&problem(Dimension::Sphere, SourceTerm::Power { scale: 1.0, exponent: -1.0 }), &grid).unwrap();
    assert!(strict.strict());
    assert_eq!(strict.monotonicity, Monotonicity::Decreasing);
    let flat = hypothesis_check(&problem(Dimension::Sphere, SourceTerm::Constant { value: 1.0 }), &grid).unwrap();
    assert!(flat.satisfied() && !flat.strict());
    assert_eq!(flat.monotonicity, Monotonicity::NonIncreasing);
    let two = hypothesis_check(&problem(Dimension::Sphere, SourceTerm::Constant { value: 2.0 }), &grid).unwrap();
    assert_eq!(two.outer, BarrierStatus::Violated);
    assert_eq!(two.inner, BarrierStatus::Strict);
    assert_eq!(two.outer_witness.g, 2.0);
    let err = homotopy_solve(&problem(Dimension::Sphere, SourceTerm::Constant { value: 2.0 }), &HomotopyConfig::default(), &grid);
    assert!(matches!(err, Err(kummer::Error::HypothesisViolated(_))));
}

#[test]
fn barrier_classes() {
    let grid = circle(32);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    assert_eq!(barrier_check(&ScalarField::constant(&grid, 2.0), &p, 1e-9), BarrierClass::ConstantAtInner);
    assert_eq!(barrier_check(&ScalarField::constant(&grid, 0.5), &p, 1e-9), BarrierClass::ConstantAtOuter);
    assert_eq!(barrier_check(&ScalarField::constant(&grid, 1.0), &p, 1e-9), BarrierClass::StrictlyInterior);
    let touching = ScalarField::from_fn(&grid, |m| 1.5 + 0.5 * m.x[0]);
    assert!(matches!(barrier_check(&touching, &p, 1e-9), BarrierClass::Violation { .. }));
}

#[test]
fn linearization_spectrum() {
    for (grid, eps, expected) in [(sphere(10), 1.0, 1.0), (circle(64), 1.0, 0.5), (sphere(10), 0.25, 0.25)] {
        let r = linearization_kernel_check(&grid, eps);
        assert!((r.min_abs - expected).abs() < 1e-10, "{r:?}");
        assert_eq!(r.argmin_degree, 0);
    }
}

#[test]
fn uniqueness_for_the_inverse_power() {
    let grid = circle(128);
    let p = problem(Dimension::Circle, SourceTerm::Power { scale: 1.0, exponent: -1.0 });
    let r = uniqueness_check(&p, &HomotopyConfig::default(), &grid, 3, 11).unwrap();
    assert!(r.strict_monotone && r.passed, "{r:?}");
}

#[test]
fn uniqueness_up_to_scale_for_constant_source() {
    let grid = circle(128);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let r = uniqueness_check(&p, &HomotopyConfig::default(), &grid, 3, 5).unwrap();
    assert!(!r.strict_monotone);
    assert!(r.normalized_discrepancy < r.threshold, "{r:?}");
}

#[test]
fn trace_csv_has_a_header() {
    let grid = circle(32);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let st = homotopy_solve(&p, &HomotopyConfig::default(), &grid).unwrap();
    let csv = trace_csv(&st.trace).unwrap();
    assert!(csv.starts_with("t,iteration,step,residual,sigma\n"));
    assert_eq!(csv.lines().count(), st.trace.len() + 1);
}

#[test]
fn manufactured_solution_on_the_sphere_refines() {
    let mut errors = Vec::new();
    for l in [16, 24, 32] {
        let grid = sphere(l);
        let g = SourceTerm::manufactured(Dimension::Sphere, 1.0, 0.1, [0.0, 0.6, 0.8]).unwrap();
        let exact = *g.exact_solution().unwrap();
        let p = problem(Dimension::Sphere, g);
        let st = homotopy_solve(&p, &HomotopyConfig::default(), &grid).unwrap();
        assert!(st.converged(), "L={l}: {:?}", st.status);
        let err = st
            .rho
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| (v / exact.value(&grid.ambient(k)) - 1.0).abs())
            .fold(0.0, f64::max);
        eprintln!("L={l} err={err:e} steps={} picard={}", st.accepted_steps, st.trace.len());
        errors.push(err);
    }
    assert!(errors.iter().all(|e| *e < 1e-6), "{errors:?}");
}
