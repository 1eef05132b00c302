use std::path::PathBuf;

use clap::Args as ClapArgs;
use kummer::kummer::{intensity_form, principal_intensities, spectrum_csv, tensor_json, KummerPoint, RadialHypersurface};
use kummer::sphere::{norm, sub, ChartVec, Dimension};
use serde::Serialize;

use crate::common::{log_checks, Check, CliError, CliResult, GeometryArgs, GeometryEcho, OutputDir};
use crate::verify::focal_sign;

#[derive(ClapArgs, Debug)]
pub struct Args {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Pointwise tolerance of the closed-form and identity checks.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Serialize)]
struct Report {
    geometry: GeometryEcho,
    tolerance: f64,
    s1_min: f64,
    s1_max: f64,
    checks: Vec<Check>,
    passed: bool,
}

/// Chart vectors along the principal directions, paired with their intensities.
fn principal_directions(p: &KummerPoint) -> Vec<(f64, ChartVec)> {
    if p.dim() == Dimension::Circle {
        return vec![(p.kappa_frame().a[0][0], [1.0, 0.0])];
    }
    let eig = p.kappa_frame().eigen();
    let l = p.metric.chol_inv_t;
    (0..2)
        .map(|k| {
            let f = eig.vectors[k];
            (eig.values[k], [l[0][0] * f[0] + l[0][1] * f[1], l[1][0] * f[0] + l[1][1] * f[1]])
        })
        .collect()
}

fn striction_csv(r: &RadialHypersurface) -> CliResult<String> {
    let mut out = String::from("point,direction,lambda,h,focus_x,focus_y,focus_z\n");
    for k in 0..r.len() {
        let p = r.point(k);
        for (i, (lambda, v)) in principal_directions(&p).into_iter().enumerate() {
            let s = p.striction(v).map_err(|e| CliError::Failed(e.to_string()))?;
            let focus = match s.point {
                Some(f) => format!("{},{},{}", f[0], f[1], f[2]),
                None => ",,".to_string(),
            };
            let h = if s.infinite { "inf".to_string() } else { s.h.to_string() };
            out.push_str(&format!("{},{},{lambda},{h},{focus}\n", r.grid_index(k), i + 1));
        }
    }
    Ok(out)
}

pub fn run(args: &Args) -> CliResult<bool> {
    let geo = args.geometry.build()?;
    let r = &geo.surface;
    let tol = args.tolerance;
    eprintln!("analyze: {} points on S^{}", r.len(), r.dimension().n());
    let out = OutputDir::create(&args.out)?;
    out.write("spectrum.csv", &spectrum_csv(r)?)?;
    out.write_json("kappa.json", &tensor_json(&intensity_form(r).kappa))?;
    out.write("striction.csv", &striction_csv(r)?)?;

    let points = r.points();
    let frame_err = |p: &KummerPoint, other| p.metric.to_frame(&p.kappa.sub(&other)).max_abs();
    let mut checks = vec![
        Check::below("kappa_via_second_form", points.iter().map(|p| frame_err(p, p.kappa_via_second_form())).fold(0.0, f64::max), tol),
        Check::below("sn_equals_product", principal_intensities(r).sn_defect(), tol),
    ];
    if let Some(shape) = &geo.shape {
        let mut worst: f64 = 0.0;
        for p in &points {
            worst = worst.max(frame_err(p, shape.expected_intensity_form(&p.metric)?));
        }
        checks.push(Check::below("kappa_closed_form", worst, tol));
        if let Some((a, sign)) = shape.as_conic().and_then(|c| c.second_focus().ok().map(|a| (a, focal_sign(c)))) {
            let n = r.dimension().nf() * sign;
            let worst = points
                .iter()
                .map(|p| (p.s1_trace() - n * p.rho() / norm(&sub(&p.position(), &a))).abs())
                .fold(0.0, f64::max);
            checks.push(Check::below("s1_focal_formula", worst, tol));
        }
    }
    log_checks(&checks);
    let s1: Vec<f64> = points.iter().map(|p| p.s1_trace()).collect();
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        geometry: geo.echo.clone(),
        tolerance: tol,
        s1_min: s1.iter().copied().fold(f64::INFINITY, f64::min),
        s1_max: s1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        checks,
        passed,
    };
    out.write_json("analyze.json", &report)?;
    Ok(passed)
}
