//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use kummer::kummer::{conformal_kappa, finite_difference_defects, RadialHypersurface};
use kummer::raytrace::*;
use kummer::shapes::{AxialProfile, AxialRadial, ConicOfRevolution, PlanePiece, Shape};
use kummer::solver::*;
use kummer::sphere::{norm, sh_index, sub, Dimension, ScalarField, Spectrum, SphereGrid, SymMat, Vec3};
use rand::Rng;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.1e}")).collect();
    format!("[{}]", parts.join(", "))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn circle(m: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::circle(m).expect("circle grid"))
}

fn sphere(l: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::sphere(l).expect("sphere grid"))
}

fn frame_error(m: &kummer::sphere::PointMetric, a: &SymMat, b: &SymMat) -> f64 {
    m.to_frame(&a.sub(b)).max_abs()
}

/// Positive field `1 + amp · f / max|f|` with random coefficients up to `degree`.
fn random_band_limited(grid: &Arc<SphereGrid>, seed: u64, degree: usize, amp: f64) -> ScalarField {
    let mut rng = ray_rng(seed, 7);
    let spec = match grid.dimension() {
        Dimension::Circle => {
            let a = (0..=degree).map(|k| if k == 0 { 0.0 } else { rng.random::<f64>() - 0.5 }).collect();
            let b = (0..=degree).map(|k| if k == 0 { 0.0 } else { rng.random::<f64>() - 0.5 }).collect();
            Spectrum::Circle { a, b }
        }
        Dimension::Sphere => {
            let mut c = vec![0.0; (degree + 1) * (degree + 1)];
            for l in 1..=degree {
                for m in -(l as i64)..=(l as i64) {
                    c[sh_index(l, m)] = rng.random::<f64>() - 0.5;
                }
            }
            Spectrum::Sphere(c)
        }
    };
    let f = ScalarField::from_spectrum(grid, spec);
    let s = f.sup_norm();
    f.map(|v| 1.0 + amp * v / s)
}

fn catalog(dim: Dimension) -> Vec<(&'static str, Shape)> {
    let z = [0.0, 0.0, 1.0];
    let axis = if dim == Dimension::Circle { [1.0, 0.0, 0.0] } else { z };
    let conic = |p, e| Shape::Conic(ConicOfRevolution::new(dim, p, e, axis).unwrap());
    let normal = if dim == Dimension::Circle { [0.0, -1.0, 0.0] } else { [0.0, 0.0, -1.0] };
    vec![
        ("sphere", Shape::Conic(ConicOfRevolution::sphere(dim, 1.3).unwrap())),
        ("plane", Shape::Plane(PlanePiece::new(dim, normal, 0.7).unwrap())),
        ("paraboloid", conic(1.0, 1.0)),
        ("ellipsoid 0.3", conic(1.0, 0.3)),
        ("ellipsoid 0.5", conic(1.0, 0.5)),
        ("ellipsoid 0.8", conic(1.0, 0.8)),
        ("hyperboloid 1.5", conic(1.0, 1.5)),
        ("hyperboloid 2", conic(1.0, 2.0)),
    ]
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    let mut points = 0;
    for grid in [circle(512), sphere(32)] {
        for (name, shape) in catalog(grid.dimension()) {
            let r = RadialHypersurface::on_domain(&grid, shape.function()).unwrap();
            points += r.len();
            for k in 0..r.len() {
                let p = r.point(k);
                let expected = shape.expected_intensity_form(&p.metric).unwrap();
                let e = frame_error(&p.metric, &p.kappa, &expected);
                if e > worst {
                    worst = e;
                    worst_name = format!("{name} on S^{}", grid.dimension().n());
                }
            }
        }
    }
    outcome(worst < 1e-9, format!("max frame error of κ {worst:.2e} ({worst_name}) over {points} points"))
}

fn criterion_2() -> Outcome {
    let grid = sphere(16);
    let (mut h_vs_0, mut c_vs_0, mut c_vs_h, mut det_err): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..10 {
        let rho = random_band_limited(&grid, seed, 6, 0.4);
        let r = RadialHypersurface::from_field(&rho).unwrap();
        for p in r.points() {
            let k0 = p.kappa;
            let kh = p.kappa_via_second_form();
            let kc = conformal_kappa(&p.metric, &p.jet.neg_log());
            h_vs_0 = h_vs_0.max(frame_error(&p.metric, &k0, &kh));
            c_vs_0 = c_vs_0.max(frame_error(&p.metric, &k0, &kc));
            c_vs_h = c_vs_h.max(frame_error(&p.metric, &kh, &kc));
            let d = p.first_form().det();
            det_err = det_err.max((d - p.first_form_det_formula()).abs() / d.abs());
        }
    }
    let pass = h_vs_0 < 1e-10 && c_vs_0 < 1e-10 && c_vs_h < 1e-10 && det_err < 1e-9;
    outcome(
        pass,
        format!("κ pairs {h_vs_0:.1e} / {c_vs_0:.1e} / {c_vs_h:.1e}, det g relative {det_err:.1e} (10 fields)"),
    )
}

fn criterion_3() -> Outcome {
    let grid = sphere(8);
    let rho = random_band_limited(&grid, 3, 4, 0.3);
    let r = RadialHypersurface::from_field(&rho).unwrap();
    let hs = [2e-2, 1e-2, 5e-3, 2.5e-3];
    let defects: Vec<_> = hs.iter().map(|&h| finite_difference_defects(&r, h).unwrap()).collect();
    let order = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (1..hs.len()).map(|i| (f(i - 1) / f(i)).log2()).collect() };
    let oe = order(&|i| defects[i].ehat);
    let os = order(&|i| defects[i].symmetry);
    let on = order(&|i| defects[i].normal);
    let ok = |v: &[f64]| v.iter().all(|o| (o - 2.0).abs() <= 0.3);
    outcome(
        ok(&oe) && ok(&os) && ok(&on),
        format!("orders ê {oe:.2?}, symmetry {os:.2?}, normal {on:.2?}"),
    )
}

fn sample_directions(dim: Dimension, count: usize, seed: u64) -> Vec<Vec3> {
    (0..count).map(|i| uniform_direction(dim, &mut ray_rng(seed, i as u64))).collect()
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let grid = sphere(8);
    let ell = ConicOfRevolution::new(Dimension::Sphere, 1.0, 0.5, [0.0, 0.0, 1.0]).unwrap();
    let a = ell.second_focus().unwrap();
    let r = RadialHypersurface::from_function(&grid, Arc::new(ell)).unwrap();
    let mut strict_err: f64 = 0.0;
    for x in sample_directions(Dimension::Sphere, 100, 1) {
        let p = r.at_ambient(&x).unwrap();
        let d = norm(&sub(&p.position(), &a));
        for k in 0..12 {
            let ang = std::f64::consts::PI * k as f64 / 12.0;
            let st = p.metric.point.u[0].sin();
            let v = [ang.cos(), ang.sin() / st];
            let s = p.striction(v).unwrap();
            strict_err = strict_err.max((s.h - d).abs());
        }
    }

    let mut focal: Vec<(String, f64)> = Vec::new();
    for ecc in [0.5, 1.5] {
        let c = ConicOfRevolution::new(Dimension::Sphere, 1.0, ecc, [0.0, 0.0, 1.0]).unwrap();
        let r = RadialHypersurface::on_domain(&grid, Arc::new(c)).unwrap();
        let density = SourceDensity::function(move |x| if c.in_domain(x) { 1.0 } else { 0.0 }, 1.0);
        let batch = trace_batch(&r, &density, 100_000, 42).unwrap();
        focal.push((format!("ecc {ecc}"), focal_concentration(&c, &batch).unwrap()));
    }
    let unit = ConicOfRevolution::sphere(Dimension::Sphere, 1.0).unwrap();
    let r = RadialHypersurface::from_function(&grid, Arc::new(unit)).unwrap();
    let batch = trace_batch(&r, &SourceDensity::Uniform, 100_000, 42).unwrap();
    let origin = batch.rays.iter().map(|ray| line_distance(ray, &[0.0; 3])).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let pass = strict_err < 1e-9 && focal.iter().all(|f| f.1 < 1e-9) && origin < 1e-14 && secs < 10.0;
    outcome(
        pass,
        format!("striction error {strict_err:.1e}, focal [{}], sphere-to-origin {origin:.1e}, {secs:.1} s",
            focal.iter().map(|(n, d)| format!("{n}: {d:.1e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let grid = sphere(16);
    let u = kummer::sphere::normalize(&[0.48, 0.6, 0.64]);
    let f = AxialRadial::new(Dimension::Sphere, u, AxialProfile::Affine { c0: 1.0, c1: 0.05 }).unwrap();
    let r = RadialHypersurface::from_function(&grid, Arc::new(f)).unwrap();
    let bins = EqualAreaBins::sphere_default();
    let batch = trace_batch(&r, &SourceDensity::Uniform, 1_000_000, 42).unwrap();
    let hist = farfield_density(&batch, &bins).unwrap();
    let expected = pushforward_probabilities(&r, &SourceDensity::Uniform, &bins, 4).unwrap();
    let mass: f64 = expected.iter().sum();
    let right = compare_bins(&hist, &expected).unwrap();
    let wrong = compare_bins(&hist, &uniform_probabilities(&bins)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = right.all_within(3.0) && !wrong.all_within(3.0) && (mass - 1.0).abs() < 1e-8 && secs < 60.0;
    outcome(
        pass,
        format!(
            "max |z| {:.2} (χ² p = {:.3}), wrong oracle max |z| {:.1}, oracle mass {mass:.10}, {secs:.1} s",
            right.max_abs_z, right.p_value, wrong.max_abs_z
        ),
    )
}

fn problem(dim: Dimension, g: SourceTerm) -> AnnulusProblem {
    AnnulusProblem::new(dim, 0.5, 2.0, g).unwrap()
}

fn sup_relative(rho: &ScalarField, exact: &AxialRadial) -> f64 {
    let grid = rho.grid();
    rho.values().iter().enumerate().map(|(k, v)| (v / exact.value(&grid.ambient(k)) - 1.0).abs()).fold(0.0, f64::max)
}

fn admissible_start(grid: &Arc<SphereGrid>, seed: u64) -> ScalarField {
    let f = random_band_limited(grid, seed, 5, 1.0);
    // map [0, 2] into the band [1/R2, 1/R1] = [0.5, 2], keeping clear of the ends
    f.map(|v| 1.25 + 0.7 * (v - 1.0))
}

/// Solutions collected for criterion 7.
struct Solved {
    name: String,
    problem: AnnulusProblem,
    config: HomotopyConfig,
    state: HomotopyState,
}

fn criterion_6(solved: &mut Vec<Solved>) -> Outcome {
    let start = Instant::now();
    let cfg = HomotopyConfig::default();
    let mut notes = Vec::new();
    let mut pass = true;

    // (a)
    let grid = circle(512);
    let p = problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 });
    let rb = cfg.r_bar(&p);
    let mut a_err: f64 = 0.0;
    for seed in 0..5 {
        let out = picard_at_t(&admissible_start(&grid, seed), 0.0, &p, &cfg).unwrap();
        pass &= out.converged;
        a_err = a_err.max(out.w.values().iter().map(|v| (v - 1.0 / rb).abs()).fold(0.0, f64::max));
    }
    pass &= a_err < 1e-10;
    notes.push(format!("(a) {a_err:.1e}"));

    // (b)
    let mut b_err: f64 = 0.0;
    let mut b_osc: f64 = 0.0;
    for grid in [circle(512), sphere(16)] {
        let dim = grid.dimension();
        let p = problem(dim, SourceTerm::Constant { value: 1.0 });
        let st = homotopy_solve(&p, &cfg, &grid).unwrap();
        pass &= st.converged();
        let r = RadialHypersurface::reciprocal(&st.w).unwrap();
        b_err = b_err.max(r.points().iter().map(|q| (q.s1_trace() - dim.nf()).abs()).fold(0.0, f64::max));
        b_osc = b_osc.max(st.rho.max() - st.rho.min());
        solved.push(Solved { name: format!("g=1 S^{}", dim.n()), problem: p, config: cfg.clone(), state: st });
    }
    pass &= b_err < 1e-8 && b_osc < 1e-8;
    notes.push(format!("(b) |S1-n| {b_err:.1e}, osc {b_osc:.1e}"));

    // (c)
    let mut c_err: f64 = 0.0;
    for grid in [circle(512), sphere(16)] {
        let dim = grid.dimension();
        let p = problem(dim, SourceTerm::Power { scale: rb, exponent: -1.0 });
        let st = homotopy_solve(&p, &cfg, &grid).unwrap();
        pass &= st.converged();
        c_err = c_err.max(st.rho.values().iter().map(|v| (v - rb).abs()).fold(0.0, f64::max));
        solved.push(Solved { name: format!("g=R/rho S^{}", dim.n()), problem: p, config: cfg.clone(), state: st });
    }
    pass &= c_err < 1e-8;
    notes.push(format!("(c) {c_err:.1e}"));

    // (d) circle
    let grid = circle(512);
    let g = SourceTerm::manufactured(Dimension::Circle, rb, 0.1, [1.0, 0.0, 0.0]).unwrap();
    let exact = *g.exact_solution().unwrap();
    let p = problem(Dimension::Circle, g);
    let st = homotopy_solve(&p, &cfg, &grid).unwrap();
    pass &= st.converged();
    let d1 = sup_relative(&st.rho, &exact);
    pass &= d1 < 1e-6;
    solved.push(Solved { name: "manufactured S^1".into(), problem: p, config: cfg.clone(), state: st });

    // (d) sphere refinement, with the iteration tolerance far below the discretization error
    let tight = HomotopyConfig { tolerance: Some(1e-12), ..HomotopyConfig::default() };
    let mut errs = Vec::new();
    for l in [16, 24, 32] {
        let grid = sphere(l);
        let g = SourceTerm::manufactured(Dimension::Sphere, rb, 0.1, [0.0, 0.6, 0.8]).unwrap();
        let exact = *g.exact_solution().unwrap();
        let p = problem(Dimension::Sphere, g);
        let st = homotopy_solve(&p, &tight, &grid).unwrap();
        pass &= st.converged();
        errs.push(sup_relative(&st.rho, &exact));
        if l == 32 {
            solved.push(Solved { name: "manufactured S^2".into(), problem: p, config: tight.clone(), state: st });
        }
    }
    let orders: Vec<f64> = (1..3)
        .map(|i| (errs[i - 1] / errs[i]).ln() / ([16.0f64, 24.0, 32.0][i] / [16.0f64, 24.0, 32.0][i - 1]).ln())
        .collect();
    const FLOOR: f64 = 1e-10;
    let at_floor = errs.iter().all(|e| *e < FLOOR);
    let order_ok = orders.iter().all(|o| *o >= 2.0);
    pass &= order_ok || at_floor;
    notes.push(format!(
        "(d) S^1 {d1:.1e}; S^2 errors {} orders {orders:.2?}{}",
        sci(&errs),
        if at_floor && !order_ok { " (all below the 1e-10 floor)" } else { "" }
    ));
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    notes.push(format!("{secs:.1} s"));
    outcome(pass, notes.join("; "))
}

fn criterion_7(solved: &[Solved]) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for s in solved {
        let hyp = hypothesis_check(&s.problem, s.state.w.grid()).unwrap();
        let tol = 10.0 * s.config.tolerance(s.problem.dimension());
        let class = barrier_check(&s.state.w, &s.problem, tol);
        let barrier_ok = match class {
            BarrierClass::Violation { .. } => false,
            BarrierClass::StrictlyInterior => true,
            _ => !hyp.strict(),
        };
        let r = RadialHypersurface::reciprocal(&s.state.w).unwrap();
        let bounds = mean_intensity_bounds_check(&r, 1e-6).unwrap();
        pass &= barrier_ok && bounds.passed;
        if !(barrier_ok && bounds.passed) {
            notes.push(format!("{}: {class:?} {bounds:?}", s.name));
        }
    }
    notes.push(format!("{} solutions barrier/bounds ok", solved.len()));
    let mut lin = Vec::new();
    for (grid, eps) in [(circle(64), 1.0), (sphere(16), 1.0), (sphere(16), 0.25)] {
        let rep = linearization_kernel_check(&grid, eps);
        let expected = 0.5 * grid.dimension().nf() * eps;
        pass &= (rep.min_abs - expected).abs() < 1e-12 && rep.argmin_degree == 0;
        lin.push(rep.min_abs);
    }
    notes.push(format!("kernel {lin:?}"));
    let cfg = HomotopyConfig::default();
    let rb = cfg.r_bar(&problem(Dimension::Circle, SourceTerm::Constant { value: 1.0 }));
    let mut uniq = Vec::new();
    for (grid, g) in [
        (circle(256), SourceTerm::Power { scale: rb, exponent: -1.0 }),
        (sphere(16), SourceTerm::Power { scale: rb, exponent: -1.0 }),
        (circle(256), SourceTerm::manufactured(Dimension::Circle, rb, 0.1, [1.0, 0.0, 0.0]).unwrap()),
        (sphere(16), SourceTerm::manufactured(Dimension::Sphere, rb, 0.1, [0.0, 0.6, 0.8]).unwrap()),
    ] {
        let p = problem(grid.dimension(), g);
        let rep = uniqueness_check(&p, &cfg, &grid, 3, 9).unwrap();
        pass &= rep.passed && rep.strict_monotone;
        uniq.push(rep.raw_discrepancy.max(rep.normalized_discrepancy));
    }
    notes.push(format!("uniqueness {}", sci(&uniq)));
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let grid = sphere(24);
    let mut straddle = 0;
    let mut worst_gap: f64 = f64::INFINITY;
    for seed in 100..120 {
        let rho = random_band_limited(&grid, seed, 6, 0.6);
        let r = RadialHypersurface::from_field(&rho).unwrap();
        let b = mean_intensity_bounds_check(&r, 1e-6).unwrap();
        if b.passed {
            straddle += 1;
        }
        worst_gap = worst_gap.min((b.max - 2.0).min(2.0 - b.min));
    }
    let rho = random_band_limited(&grid, 7, 6, 0.5);
    let base = RadialHypersurface::from_field(&rho).unwrap();
    let mut hom: f64 = 0.0;
    for lambda in [0.5, 2.0, 10.0] {
        let scaled = RadialHypersurface::from_field(&rho.map(|v| lambda * v)).unwrap();
        for k in 0..base.len() {
            let (p, q) = (base.point(k), scaled.point(k));
            hom = hom.max(frame_error(&p.metric, &p.kappa, &q.kappa));
        }
    }
    outcome(
        straddle == 20 && hom < 1e-12,
        format!("{straddle}/20 straddle n (smallest margin {worst_gap:.2e}), homothety defect {hom:.1e}"),
    )
}

fn main() -> ExitCode {
    let mut solved = Vec::new();
    let runs: Vec<(usize, Box<dyn FnOnce(&mut Vec<Solved>) -> Outcome>)> = vec![
        (1, Box::new(|_| criterion_1())),
        (2, Box::new(|_| criterion_2())),
        (3, Box::new(|_| criterion_3())),
        (4, Box::new(|_| criterion_4())),
        (5, Box::new(|_| criterion_5())),
        (6, Box::new(criterion_6)),
        (7, Box::new(|s: &mut Vec<Solved>| criterion_7(s))),
        (8, Box::new(|_| criterion_8())),
    ];
    let mut failures = 0;
    for (n, run) in runs {
        let t = Instant::now();
        let o = run(&mut solved);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n}: {tag} [{:.1} s] {}", t.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failures += 1;
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}

