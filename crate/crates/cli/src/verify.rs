use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args as ClapArgs, ValueEnum};
use kummer::kummer::{conformal_kappa, finite_difference_defects, KummerPoint, RadialHypersurface};
use kummer::raytrace::{focal_concentration, line_distance, trace_batch, SourceDensity};
use kummer::shapes::{ConicKind, ConicOfRevolution, PlanePiece, Shape};
use kummer::solver::mean_intensity_bounds_check;
use kummer::sphere::{norm, sub, Dimension, Resolution, ScalarField, SphereGrid, SymMat};
use serde::Serialize;

use crate::common::{grid_for, log_checks, orders, Check, CliResult, OutputDir};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    /// Closed-form κ of conics and planes.
    Shapes,
    /// κ by three routes on random fields.
    Identities,
    /// Finite-difference orders of the reflection-map identities.
    FiniteDifference,
    /// Mean intensity of closed reflectors straddles n; homothety invariance.
    Proposition,
    /// Focusing of traced rays.
    Raytrace,
}

#[derive(ClapArgs, Debug)]
pub struct Args {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Seed of the random fields and ray batches.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Report {
    suite: Suite,
    dimension: usize,
    grid: Resolution,
    seed: u64,
    checks: Vec<Check>,
    passed: bool,
}

const SHAPE_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-10;
const FOCAL_TOL: f64 = 1e-9;

fn frame_error(p: &KummerPoint, other: &SymMat) -> f64 {
    p.metric.to_frame(&p.kappa.sub(other)).max_abs()
}

fn catalog(dim: Dimension) -> CliResult<Vec<(&'static str, Shape)>> {
    let axis = if dim == Dimension::Circle { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
    let normal = if dim == Dimension::Circle { [0.0, -1.0, 0.0] } else { [0.0, 0.0, -1.0] };
    let conic = |e| ConicOfRevolution::new(dim, 1.0, e, axis).map(Shape::Conic);
    Ok(vec![
        ("sphere", Shape::Conic(ConicOfRevolution::sphere(dim, 1.3)?)),
        ("plane", Shape::Plane(PlanePiece::new(dim, normal, 0.7)?)),
        ("paraboloid", conic(1.0)?),
        ("ellipsoid", conic(0.5)?),
        ("hyperboloid", conic(1.5)?),
    ])
}

/// Rays of a hyperboloid diverge from its second focus, so `S₁ = −nρ/|ρx − a|` there.
pub fn focal_sign(c: &ConicOfRevolution) -> f64 {
    if c.kind() == ConicKind::Hyperboloid {
        -1.0
    } else {
        1.0
    }
}

fn shapes(grid: &Arc<SphereGrid>, checks: &mut Vec<Check>) -> CliResult<()> {
    let n = grid.dimension().nf();
    for (name, shape) in catalog(grid.dimension())? {
        let r = RadialHypersurface::on_domain(grid, shape.function())?;
        let mut worst: f64 = 0.0;
        let mut focal: f64 = 0.0;
        let a = shape.as_conic().and_then(|c| c.second_focus().ok().map(|a| (a, focal_sign(c))));
        for p in r.points() {
            worst = worst.max(frame_error(&p, &shape.expected_intensity_form(&p.metric)?));
            if let Some((a, sign)) = a {
                focal = focal.max((p.s1_trace() - sign * n * p.rho() / norm(&sub(&p.position(), &a))).abs());
            }
        }
        checks.push(Check::below(format!("shapes/{name}/kappa"), worst, SHAPE_TOL));
        if a.is_some() {
            checks.push(Check::below(format!("shapes/{name}/s1_focal"), focal, SHAPE_TOL));
        }
    }
    Ok(())
}

fn identities(grid: &Arc<SphereGrid>, seed: u64, checks: &mut Vec<Check>) -> CliResult<()> {
    let (mut second, mut conformal, mut det, mut mean) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..5 {
        let rho = ScalarField::random_positive(grid, seed.wrapping_add(k), 6, 0.4);
        let r = RadialHypersurface::from_field(&rho)?;
        for p in r.points() {
            second = second.max(frame_error(&p, &p.kappa_via_second_form()));
            conformal = conformal.max(frame_error(&p, &conformal_kappa(&p.metric, &p.jet.neg_log())));
            let d = p.first_form().det();
            det = det.max((d - p.first_form_det_formula()).abs() / d.abs());
            mean = mean.max((p.s1_trace() - p.mean_operator()).abs());
        }
    }
    checks.push(Check::below("identities/second_form", second, IDENTITY_TOL));
    checks.push(Check::below("identities/conformal", conformal, IDENTITY_TOL));
    checks.push(Check::below("identities/first_form_det", det, IDENTITY_TOL));
    checks.push(Check::below("identities/mean_operator", mean, 1e-8));
    Ok(())
}

fn finite_difference(grid: &Arc<SphereGrid>, seed: u64, checks: &mut Vec<Check>) -> CliResult<()> {
    // the check evaluates off-grid, so a coarse carrier grid keeps it cheap
    let coarse = match grid.dimension() {
        Dimension::Circle => grid_for(1, None, Some(64), 0, 0)?,
        Dimension::Sphere => grid_for(2, Some(8), None, 0, 0)?,
    };
    let r = RadialHypersurface::from_field(&ScalarField::random_positive(&coarse, seed, 4, 0.3))?;
    let hs = [2e-2, 1e-2, 5e-3, 2.5e-3];
    let defects = hs.iter().map(|&h| finite_difference_defects(&r, h)).collect::<Result<Vec<_>, _>>()?;
    let mut series: Vec<(&str, Vec<f64>)> = vec![
        ("ehat", defects.iter().map(|d| d.ehat).collect()),
        ("normal", defects.iter().map(|d| d.normal).collect()),
    ];
    if grid.dimension() == Dimension::Sphere {
        series.push(("symmetry", defects.iter().map(|d| d.symmetry).collect()));
    }
    for (name, e) in series {
        let worst = orders(&hs, &e).iter().map(|o| (o - 2.0).abs()).fold(0.0, f64::max);
        checks.push(Check::below(format!("finite_difference/{name}/order_deviation"), worst, 0.3));
    }
    Ok(())
}

fn proposition(grid: &Arc<SphereGrid>, seed: u64, checks: &mut Vec<Check>) -> CliResult<()> {
    let n = grid.dimension().nf();
    let mut margin = f64::INFINITY;
    let mut all = true;
    for k in 0..20 {
        let rho = ScalarField::random_positive(grid, seed.wrapping_add(100 + k), 6, 0.6);
        let b = mean_intensity_bounds_check(&RadialHypersurface::from_field(&rho)?, 1e-6)?;
        all &= b.passed;
        margin = margin.min((b.max - n).min(n - b.min));
    }
    checks.push(Check::flag("proposition/straddle_margin", margin, 0.0, all));
    let rho = ScalarField::random_positive(grid, seed, 6, 0.5);
    let base = RadialHypersurface::from_field(&rho)?;
    let mut hom: f64 = 0.0;
    for lambda in [0.5, 2.0, 10.0] {
        let scaled = RadialHypersurface::from_field(&rho.map(|v| lambda * v))?;
        for k in 0..base.len() {
            let (p, q) = (base.point(k), scaled.point(k));
            hom = hom.max(frame_error(&p, &q.kappa));
        }
    }
    // spectral second derivatives amplify roundoff like the square of the top wavenumber
    let tol = 1e-12 * (grid.degree() as f64 / 24.0).powi(2).max(1.0);
    checks.push(Check::below("proposition/homothety", hom, tol));
    Ok(())
}

fn raytrace(dim: Dimension, seed: u64, checks: &mut Vec<Check>) -> CliResult<()> {
    let grid = match dim {
        Dimension::Circle => grid_for(1, None, Some(64), 0, 0)?,
        Dimension::Sphere => grid_for(2, Some(8), None, 0, 0)?,
    };
    let axis = if dim == Dimension::Circle { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
    for ecc in [0.5, 1.5] {
        let c = ConicOfRevolution::new(dim, 1.0, ecc, axis)?;
        let r = RadialHypersurface::on_domain(&grid, Arc::new(c))?;
        let density = SourceDensity::function(move |x| if c.in_domain(x) { 1.0 } else { 0.0 }, 1.0);
        let batch = trace_batch(&r, &density, 100_000, seed)?;
        checks.push(Check::below(format!("raytrace/focal_ecc_{ecc}"), focal_concentration(&c, &batch)?, FOCAL_TOL));
    }
    let unit = ConicOfRevolution::sphere(dim, 1.0)?;
    let r = RadialHypersurface::from_function(&grid, Arc::new(unit))?;
    let batch = trace_batch(&r, &SourceDensity::Uniform, 100_000, seed)?;
    let origin = batch.rays.iter().map(|ray| line_distance(ray, &[0.0; 3])).fold(0.0, f64::max);
    checks.push(Check::below("raytrace/sphere_through_origin", origin, 1e-14));
    Ok(())
}

pub fn run(args: &Args) -> CliResult<bool> {
    let grid = grid_for(args.n, args.l, args.m, 16, 512)?;
    let out = OutputDir::create(&args.out)?;
    let want = |s: Suite| args.suite == Suite::All || args.suite == s;
    let mut checks = Vec::new();
    if want(Suite::Shapes) {
        eprintln!("verify: shapes");
        shapes(&grid, &mut checks)?;
    }
    if want(Suite::Identities) {
        eprintln!("verify: identities");
        identities(&grid, args.seed, &mut checks)?;
    }
    if want(Suite::FiniteDifference) {
        eprintln!("verify: finite differences");
        finite_difference(&grid, args.seed, &mut checks)?;
    }
    if want(Suite::Proposition) {
        eprintln!("verify: mean intensity bounds");
        proposition(&grid, args.seed, &mut checks)?;
    }
    if want(Suite::Raytrace) {
        eprintln!("verify: ray tracing");
        raytrace(grid.dimension(), args.seed, &mut checks)?;
    }
    log_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        suite: args.suite,
        dimension: grid.dimension().n(),
        grid: grid.resolution(),
        seed: args.seed,
        checks,
        passed,
    };
    out.write_json("verify.json", &report)?;
    Ok(passed)
}
