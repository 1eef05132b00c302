use std::path::PathBuf;

use clap::{Args as ClapArgs, ValueEnum};
use kummer::kummer::finite_difference_defects;
use kummer::solver::homotopy_solve;
use kummer::sphere::Dimension;
use serde::Serialize;

use crate::common::{log_checks, orders, Check, CliError, CliResult, GeometryArgs, OutputDir};
use crate::solve::{load, problem_grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    /// Refine the grid of a manufactured solve.
    Solver,
    /// Shrink the step of the finite-difference identity checks.
    FiniteDifference,
}

#[derive(ClapArgs, Debug)]
pub struct Args {
    #[arg(long, value_enum, default_value = "solver")]
    pub study: Study,
    /// Manufactured problem JSON for the solver study.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Grid levels (points on S^1, degree on S^2) for the solver study.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    /// Chart steps for the finite-difference study.
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.01,0.005,0.0025")]
    pub steps: Vec<f64>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Minimum observed order of the solver study.
    #[arg(long, default_value_t = 2.0)]
    pub min_order: f64,
    /// Allowed deviation from order 2 in the finite-difference study.
    #[arg(long, default_value_t = 0.3)]
    pub order_slack: f64,
    /// Errors below this are at roundoff and exempt from the order test.
    #[arg(long, default_value_t = 1e-10)]
    pub floor: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Report {
    study: Study,
    min_order: f64,
    order_slack: f64,
    floor: f64,
    spacing: Vec<f64>,
    errors: Vec<Vec<f64>>,
    columns: Vec<String>,
    orders: Vec<Vec<f64>>,
    checks: Vec<Check>,
    passed: bool,
}

fn table(levels: &[String], spacing: &[f64], columns: &[String], errors: &[Vec<f64>]) -> String {
    let mut s = format!("level,spacing,{}\n", columns.join(","));
    for (i, level) in levels.iter().enumerate() {
        let row: Vec<String> = errors.iter().map(|e| e[i].to_string()).collect();
        s.push_str(&format!("{level},{},{}\n", spacing[i], row.join(",")));
    }
    s
}

/// Order test of one column; columns whose errors all sit below `floor` pass.
fn order_check(args: &Args, name: &str, e: &[f64], o: &[f64]) -> Check {
    let at_floor = e.iter().all(|v| *v < args.floor);
    match args.study {
        Study::Solver => {
            let worst = o.iter().copied().fold(f64::INFINITY, f64::min);
            Check::flag(format!("{name}/min_order"), worst, args.min_order, worst >= args.min_order || at_floor)
        }
        Study::FiniteDifference => {
            let dev = o.iter().map(|v| (v - 2.0).abs()).fold(0.0, f64::max);
            Check::flag(format!("{name}/order_deviation"), dev, args.order_slack, dev <= args.order_slack || at_floor)
        }
    }
}

fn solver_study(args: &Args) -> CliResult<(Vec<String>, Vec<f64>, Vec<String>, Vec<Vec<f64>>)> {
    let path = args.problem.as_ref().ok_or_else(|| CliError::Config("the solver study needs --problem".into()))?;
    let (spec, problem) = load(path)?;
    let exact = *problem
        .source()
        .exact_solution()
        .ok_or_else(|| CliError::Config("the solver study needs a manufactured source".into()))?;
    let levels = args.levels.clone().unwrap_or_else(|| match spec.n {
        1 => vec![32, 64, 128, 256],
        _ => vec![16, 24, 32],
    });
    if levels.len() < 2 {
        return Err(CliError::Config("at least two levels are needed".into()));
    }
    let mut config = spec.solver.clone();
    // keep the iteration error well below the discretization error
    config.tolerance = Some(config.tolerance.unwrap_or(1e-12).min(1e-12));
    let mut spacing = Vec::new();
    let mut errors = Vec::new();
    for &level in &levels {
        let grid = problem_grid(&spec, Some(level))?;
        eprintln!("convergence: solving on {:?}", grid.resolution());
        let state = homotopy_solve(&problem, &config, &grid)?;
        if !state.converged() {
            return Err(CliError::Failed(format!("solve did not converge on {:?}", grid.resolution())));
        }
        let err = state
            .rho
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| (v / exact.value(&grid.ambient(k)) - 1.0).abs())
            .fold(0.0, f64::max);
        spacing.push(grid.spacing());
        errors.push(err);
    }
    let names = levels.iter().map(|l| l.to_string()).collect();
    Ok((names, spacing, vec!["relative_error".into()], vec![errors]))
}

fn fd_study(args: &Args) -> CliResult<(Vec<String>, Vec<f64>, Vec<String>, Vec<Vec<f64>>)> {
    if args.steps.len() < 2 {
        return Err(CliError::Config("at least two steps are needed".into()));
    }
    let geo = args.geometry.build()?;
    let mut defects = Vec::new();
    for &h in &args.steps {
        eprintln!("convergence: finite differences at h = {h}");
        defects.push(finite_difference_defects(&geo.surface, h)?);
    }
    let mut columns = vec!["ehat".to_string(), "normal".to_string()];
    let mut errors = vec![defects.iter().map(|d| d.ehat).collect(), defects.iter().map(|d| d.normal).collect()];
    if geo.surface.dimension() == Dimension::Sphere {
        columns.push("symmetry".into());
        errors.push(defects.iter().map(|d| d.symmetry).collect());
    }
    let names = args.steps.iter().map(|h| h.to_string()).collect();
    Ok((names, args.steps.clone(), columns, errors))
}

pub fn run(args: &Args) -> CliResult<bool> {
    let (levels, spacing, columns, errors) = match args.study {
        Study::Solver => solver_study(args)?,
        Study::FiniteDifference => fd_study(args)?,
    };
    let out = OutputDir::create(&args.out)?;
    out.write("convergence.csv", &table(&levels, &spacing, &columns, &errors))?;
    let ords: Vec<Vec<f64>> = errors.iter().map(|e| orders(&spacing, e)).collect();
    let checks: Vec<Check> = columns
        .iter()
        .zip(&errors)
        .zip(&ords)
        .map(|((c, e), o)| order_check(args, c, e, o))
        .collect();
    log_checks(&checks);
    let passed = checks.iter().all(|c| c.passed);
    let report = Report {
        study: args.study,
        min_order: args.min_order,
        order_slack: args.order_slack,
        floor: args.floor,
        spacing,
        errors,
        columns,
        orders: ords,
        checks,
        passed,
    };
    out.write_json("convergence.json", &report)?;
    Ok(passed)
}
