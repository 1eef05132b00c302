use std::path::PathBuf;

use clap::Args as ClapArgs;
use kummer::kummer::RadialHypersurface;
use kummer::solver::{
    homotopy_solve, hypothesis_check, residual, trace_csv, AnnulusProblem, BarrierClass, HomotopyConfig,
    HypothesisReport, ProblemSpec, SolveStatus,
};
use kummer::sphere::{Resolution, SphereGrid};
use serde::Serialize;

use crate::common::{grid_for, log_checks, read_file, Check, CliError, CliResult, OutputDir};

#[derive(ClapArgs, Debug)]
pub struct Args {
    /// Problem JSON: `{n, R1, R2, g, solver?, resolution?, output?}`.
    #[arg(long)]
    pub problem: PathBuf,
    /// Output directory; overrides the problem's `output`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Points on S^1 or degree on S^2; overrides the problem's `resolution`.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Solve even when the barrier hypothesis fails.
    #[arg(long)]
    pub force: bool,
}

pub fn load(path: &std::path::Path) -> CliResult<(ProblemSpec, AnnulusProblem)> {
    let spec = ProblemSpec::from_json(&read_file(path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let problem = spec.build()?;
    Ok((spec, problem))
}

pub fn problem_grid(spec: &ProblemSpec, resolution: Option<usize>) -> CliResult<std::sync::Arc<SphereGrid>> {
    let res = resolution.or(spec.resolution);
    if spec.n == 1 {
        grid_for(1, None, res, 16, 512)
    } else {
        grid_for(spec.n, res, None, 16, 512)
    }
}

#[derive(Serialize)]
struct Effective {
    tolerance: f64,
    residual_tolerance: f64,
    r_bar: f64,
    solver: HomotopyConfig,
}

#[derive(Serialize)]
struct Report {
    problem: ProblemSpec,
    grid: Resolution,
    effective: Effective,
    status: SolveStatus,
    t: f64,
    accepted_steps: usize,
    rejected_steps: usize,
    band_excursion: f64,
    barrier: BarrierClass,
    hypothesis: HypothesisReport,
    rho_min: f64,
    rho_max: f64,
    /// `sup |S₁(ρ) − n g(x, ρ)|` recomputed from the solution.
    mean_intensity_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_error: Option<f64>,
    checks: Vec<Check>,
    passed: bool,
}

pub fn run(args: &Args) -> CliResult<bool> {
    let (spec, problem) = load(&args.problem)?;
    let grid = problem_grid(&spec, args.resolution)?;
    let out_path = args.out.clone().or_else(|| spec.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| "out".into());
    let out = OutputDir::create(&out_path)?;
    let mut config = spec.solver.clone();
    config.force |= args.force;
    let dim = problem.dimension();
    eprintln!(
        "solve: S^{} with R1 = {}, R2 = {} on {:?}",
        dim.n(),
        problem.r1(),
        problem.r2(),
        grid.resolution()
    );
    let hypothesis = hypothesis_check(&problem, &grid)?;
    eprintln!("solve: {}", hypothesis.describe());
    let state = homotopy_solve(&problem, &config, &grid)?;
    match state.status {
        SolveStatus::Converged => eprintln!("solve: reached t = 1 in {} steps", state.accepted_steps),
        SolveStatus::StepUnderflow { t, step } => eprintln!("solve: continuation stalled at t = {t} (step {step:e})"),
    }
    out.write("rho.json", &state.rho.to_json()?)?;
    out.write("trace.csv", &trace_csv(&state.trace)?)?;

    let tol = config.tolerance(dim);
    let res_tol = config.residual_tolerance(dim);
    let final_residual = state.residual_history.last().map(|r| r.1).unwrap_or(f64::INFINITY);
    let rep = residual(&RadialHypersurface::reciprocal(&state.w)?, &problem)?;
    let checks = vec![
        Check::flag("continuation_reached_one", state.t, 1.0, state.converged()),
        Check::below("fixed_point_residual", final_residual, res_tol),
    ];
    let exact_error = match problem.source().exact_solution() {
        Some(exact) => Some(
            state
                .rho
                .values()
                .iter()
                .enumerate()
                .map(|(k, v)| (v / exact.value(&grid.ambient(k)) - 1.0).abs())
                .fold(0.0, f64::max),
        ),
        None => None,
    };
    log_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        effective: Effective { tolerance: tol, residual_tolerance: res_tol, r_bar: config.r_bar(&problem), solver: config },
        problem: spec,
        grid: grid.resolution(),
        status: state.status,
        t: state.t,
        accepted_steps: state.accepted_steps,
        rejected_steps: state.rejected_steps,
        band_excursion: state.band_excursion,
        barrier: state.barrier,
        hypothesis,
        rho_min: state.rho.min(),
        rho_max: state.rho.max(),
        mean_intensity_residual: rep.sup_direct,
        exact_error,
        checks,
        passed,
    };
    out.write_json("solve.json", &report)?;
    Ok(passed)
}
