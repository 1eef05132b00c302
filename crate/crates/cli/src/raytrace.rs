use std::path::PathBuf;
use std::time::Instant;

use clap::Args as ClapArgs;
use kummer::raytrace::{
    compare_bins, farfield_density, focal_concentration, histogram_csv, pushforward_probabilities, trace_batch,
    BinComparison, EqualAreaBins, SourceDensity,
};
use kummer::shapes::{ConicKind, Shape};
use kummer::sphere::{norm, sub, Dimension};
use serde::Serialize;

use crate::common::{log_checks, Check, CliError, CliResult, GeometryArgs, GeometryEcho, OutputDir};

#[derive(ClapArgs, Debug)]
pub struct Args {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub rays: usize,
    /// Seed of the ray sampler; required so runs can be reproduced.
    #[arg(long)]
    pub seed: u64,
    /// Colatitude bands of the far-field bins on S^2.
    #[arg(long, default_value_t = 12)]
    pub bands: usize,
    /// Longitude sectors per band on S^2, or arcs on S^1.
    #[arg(long, default_value_t = 16)]
    pub sectors: usize,
    /// Gauss–Legendre order per bin of the pushforward oracle.
    #[arg(long, default_value_t = 4)]
    pub order: usize,
    /// Bound on the distance of reflected lines from the second focus.
    #[arg(long, default_value_t = 1e-9)]
    pub focal_tolerance: f64,
    /// Smallest acceptable χ² p-value against the pushforward oracle.
    #[arg(long, default_value_t = 1e-3)]
    pub min_p_value: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Report {
    geometry: GeometryEcho,
    seed: u64,
    rays: usize,
    /// `uniform` on the whole sphere or `uniform_on_domain`.
    source: &'static str,
    bins: EqualAreaBins,
    #[serde(skip_serializing_if = "Option::is_none")]
    focal_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collimation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<BinComparison>,
    checks: Vec<Check>,
    passed: bool,
}

pub fn run(args: &Args) -> CliResult<bool> {
    let geo = args.geometry.build()?;
    let r = &geo.surface;
    let dim = r.dimension();
    let bins = match dim {
        Dimension::Circle => EqualAreaBins::circle(args.sectors)?,
        Dimension::Sphere => EqualAreaBins::sphere(args.bands, args.sectors)?,
    };
    let closed = r.is_closed() && r.support().is_none();
    let (density, source) = match (&geo.shape, closed) {
        (Some(Shape::Conic(c)), false) => {
            let c = *c;
            (SourceDensity::function(move |x| if c.in_domain(x) { 1.0 } else { 0.0 }, 1.0), "uniform_on_domain")
        }
        (Some(Shape::Plane(p)), false) => {
            let p = *p;
            (SourceDensity::function(move |x| if p.in_domain(x) { 1.0 } else { 0.0 }, 1.0), "uniform_on_domain")
        }
        _ => (SourceDensity::Uniform, "uniform"),
    };
    let start = Instant::now();
    eprintln!("raytrace: {} rays, seed {}", args.rays, args.seed);
    let batch = trace_batch(r, &density, args.rays, args.seed)?;
    eprintln!("raytrace: traced in {:.2} s", start.elapsed().as_secs_f64());
    let hist = farfield_density(&batch, &bins)?;
    let out = OutputDir::create(&args.out)?;
    out.write("histogram.csv", &histogram_csv(&hist)?)?;

    let mut checks = Vec::new();
    let conic = geo.shape.as_ref().and_then(|s| s.as_conic());
    let mut focal_distance = None;
    let mut collimation = None;
    if let Some(c) = conic {
        if c.kind() == ConicKind::Paraboloid {
            let first = batch.rays[0].direction;
            let spread = batch.rays.iter().map(|ray| norm(&sub(&ray.direction, &first))).fold(0.0, f64::max);
            collimation = Some(spread);
            checks.push(Check::below("collimation", spread, args.focal_tolerance));
        } else {
            let d = focal_concentration(c, &batch)?;
            focal_distance = Some(d);
            checks.push(Check::below("focal_distance", d, args.focal_tolerance));
        }
    }
    let (mut oracle, mut comparison) = (None, None);
    if closed {
        eprintln!("raytrace: pushforward oracle on {} bins", bins.len());
        let expected = pushforward_probabilities(r, &density, &bins, args.order)
            .map_err(|e| CliError::Failed(format!("pushforward oracle: {e}")))?;
        let cmp = compare_bins(&hist, &expected)?;
        eprintln!("raytrace: max |z| {:.2}, χ² {:.1} on {} dof", cmp.max_abs_z, cmp.chi_square, cmp.degrees_of_freedom);
        checks.push(Check::flag("chi_square_p_value", cmp.p_value, args.min_p_value, cmp.p_value >= args.min_p_value));
        oracle = Some(expected);
        comparison = Some(cmp);
    } else {
        eprintln!("raytrace: open reflector, histogram not compared with an oracle");
    }
    log_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        geometry: geo.echo.clone(),
        seed: args.seed,
        rays: args.rays,
        source,
        bins,
        focal_distance,
        collimation,
        oracle,
        comparison,
        checks,
        passed,
    };
    out.write_json("raytrace.json", &report)?;
    Ok(passed)
}
