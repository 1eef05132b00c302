use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::sphere::{apply_shifted_laplacian, gradient, solve_shifted, ScalarField, SphereGrid};
use crate::{Error, Result};

use super::checks::{barrier_check, hypothesis_check, BarrierClass};
use super::problem::{AnnulusProblem, HomotopyConfig, PicardShift};

/// One Picard iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub iteration: usize,
    /// `sup |w_{k+1} − w_k|`
    pub step: f64,
    /// `sup |Δ̂w_k − Q^t(w_k)|`
    pub residual: f64,
    pub sigma: f64,
}

fn check_positive(w: &ScalarField) -> Result<()> {
    match w.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        Some((index, &value)) => Err(Error::NonPositiveIterate { index, value }),
        None => Ok(()),
    }
}

fn check_grid(w: &ScalarField, problem: &AnnulusProblem) -> Result<()> {
    if w.grid().dimension() != problem.dimension() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `Q^t` and its pointwise derivative in `w` (with `∇w` frozen).
fn q_t_with_derivative(
    w: &ScalarField,
    t: f64,
    problem: &AnnulusProblem,
    config: &HomotopyConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_grid(w, problem)?;
    check_positive(w)?;
    let n = problem.dimension().nf();
    let eps = config.epsilon;
    let rb = config.r_bar(problem);
    let (lo, hi) = (1.0 / problem.r2(), 1.0 / problem.r1());
    let grad2 = gradient(w).norm2();
    let metric = w.grid().metric().points();
    let rows = w
        .values()
        .par_iter()
        .zip(grad2.par_iter())
        .zip(metric.par_iter())
        .map(|((&wv, &d2), m)| -> Result<(f64, f64)> {
            let (gb, dgb) = problem.g_bar(m, 1.0 / wv.clamp(lo, hi))?;
            let s = wv * wv + d2;
            let big_q = n * d2 / (2.0 * wv) + s / (2.0 * wv) * gb;
            let d_big_q = -n * d2 / (2.0 * wv * wv) + (wv * wv - d2) / (2.0 * wv * wv) * gb
                - s / (2.0 * wv * wv * wv) * dgb;
            let small_q = 0.5 * n * wv.powf(1.0 + eps) * rb.powf(eps);
            let d_small_q = 0.5 * n * (1.0 + eps) * (wv * rb).powf(eps);
            Ok((t * big_q + (1.0 - t) * small_q, t * d_big_q + (1.0 - t) * d_small_q))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().unzip())
}

/// Pointwise `Q^t(x, w, ∇w) = t Q + (1 − t) q(w)`, with `w` clamped into
/// `[1/R₂, 1/R₁]` only inside `ḡ(x, 1/w)`.
pub fn rhs_q_t(w: &ScalarField, t: f64, problem: &AnnulusProblem, config: &HomotopyConfig) -> Result<ScalarField> {
    let (q, _) = q_t_with_derivative(w, t, problem, config)?;
    ScalarField::new(w.grid().clone(), q)
}

/// `T(w, t) = Δ̂⁻¹ Q^t(w)`.
pub fn linear_step_t(w: &ScalarField, t: f64, problem: &AnnulusProblem, config: &HomotopyConfig) -> Result<ScalarField> {
    solve_shifted(&rhs_q_t(w, t, problem, config)?, 0.0)
}

/// `sup |Δ̂w − Q^t(w)|`.
pub fn fixed_point_residual(w: &ScalarField, t: f64, problem: &AnnulusProblem, config: &HomotopyConfig) -> Result<f64> {
    let q = rhs_q_t(w, t, problem, config)?;
    Ok(sup_diff(&apply_shifted_laplacian(w), &q))
}

fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Result of a Picard run at fixed `t`.
#[derive(Clone, Debug)]
pub struct PicardOutcome {
    /// Converged iterate, or the iterate with the smallest residual on failure.
    pub w: ScalarField,
    pub converged: bool,
    pub diverged: bool,
    pub iterations: usize,
    pub step: f64,
    pub residual: f64,
    pub trace: Vec<TraceRow>,
}

fn shift_for(config: &HomotopyConfig, dq: &[f64], half_n: f64) -> f64 {
    match config.shift {
        PicardShift::None => 0.0,
        PicardShift::Fixed(s) => s,
        PicardShift::Adaptive => {
            let mean = dq.iter().sum::<f64>() / dq.len() as f64;
            mean.max(half_n + config.shift_margin)
        }
    }
}

/// Damped Picard iteration for `w = T(w, t)`, written with a shift `σ` as
/// `w ← (1 − τ) w + τ (Δ̂ − σ)⁻¹ (Q^t(w) − σ w)`. Every shift has the same
/// fixed points; `σ = 0` is the plain map `T`.
pub fn picard_at_t(
    w_init: &ScalarField,
    t: f64,
    problem: &AnnulusProblem,
    config: &HomotopyConfig,
) -> Result<PicardOutcome> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidProblem(format!("homotopy parameter {t} outside [0, 1]")));
    }
    check_grid(w_init, problem)?;
    check_positive(w_init)?;
    let dim = problem.dimension();
    let half_n = 0.5 * dim.nf();
    let tol = config.tolerance(dim);
    let res_tol = config.residual_tolerance(dim);
    let tau = config.tau;

    let mut w = w_init.clone();
    let mut best: Option<(f64, ScalarField)> = None;
    let mut trace = Vec::new();
    let mut step = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        let (q, dq) = match q_t_with_derivative(&w, t, problem, config) {
            Ok(v) => v,
            Err(Error::NonPositiveIterate { .. }) => {
                return Ok(failed(best, w, iteration - 1, step, residual, trace, true));
            }
            Err(e) => return Err(e),
        };
        let grid = w.grid().clone();
        let q = ScalarField::new(grid.clone(), q)?;
        residual = sup_diff(&apply_shifted_laplacian(&w), &q);
        if !residual.is_finite() {
            return Ok(failed(best, w, iteration - 1, step, residual, trace, true));
        }
        let best_res = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if residual < best_res {
            best = Some((residual, w.clone()));
        } else if residual > 10.0 * best_res {
            return Ok(failed(best, w, iteration - 1, step, residual, trace, true));
        }
        if step < tol && residual < res_tol {
            return Ok(PicardOutcome { w, converged: true, diverged: false, iterations: iteration - 1, step, residual, trace });
        }
        let sigma = shift_for(config, &dq, half_n);
        let rhs = q.zip_with(&w, |qv, wv| qv - sigma * wv)?;
        let tw = solve_shifted(&rhs, sigma)?;
        let next = w.zip_with(&tw, |a, b| (1.0 - tau) * a + tau * b)?;
        step = sup_diff(&next, &w);
        trace.push(TraceRow { t, iteration, step, residual, sigma });
        w = next;
    }
    let final_res = fixed_point_residual(&w, t, problem, config).unwrap_or(f64::INFINITY);
    if step < tol && final_res < res_tol {
        let iterations = config.max_iterations;
        return Ok(PicardOutcome { w, converged: true, diverged: false, iterations, step, residual: final_res, trace });
    }
    Ok(failed(best, w, config.max_iterations, step, final_res, trace, false))
}

fn failed(
    best: Option<(f64, ScalarField)>,
    current: ScalarField,
    iterations: usize,
    step: f64,
    residual: f64,
    trace: Vec<TraceRow>,
    diverged: bool,
) -> PicardOutcome {
    let (residual, w) = match best {
        Some((r, w)) if !(r >= residual) || !residual.is_finite() => (r, w),
        _ => (residual, current),
    };
    PicardOutcome { w, converged: false, diverged, iterations, step, residual, trace }
}

/// Outcome of a continuation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum SolveStatus {
    Converged,
    /// The continuation step fell below the floor at this `t`.
    StepUnderflow { t: f64, step: f64 },
}

#[derive(Clone, Debug)]
pub struct HomotopyState {
    /// Last `t` reached; 1 on success.
    pub t: f64,
    pub w: ScalarField,
    /// `ρ = 1/w`.
    pub rho: ScalarField,
    pub status: SolveStatus,
    pub trace: Vec<TraceRow>,
    /// Final residual `sup |Δ̂w − Q^t(w)|` at every accepted `t`.
    pub residual_history: Vec<(f64, f64)>,
    /// Largest excursion of an accepted iterate outside `[1/R₂, 1/R₁]`.
    pub band_excursion: f64,
    pub barrier: BarrierClass,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl HomotopyState {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

fn band_excursion(w: &ScalarField, problem: &AnnulusProblem) -> f64 {
    let (lo, hi) = (1.0 / problem.r2(), 1.0 / problem.r1());
    w.values().iter().map(|&v| (lo - v).max(v - hi).max(0.0)).fold(0.0, f64::max)
}

/// Continue `t: 0 → 1` from `w₀ = 1/R̄`.
pub fn homotopy_solve(problem: &AnnulusProblem, config: &HomotopyConfig, grid: &Arc<SphereGrid>) -> Result<HomotopyState> {
    let w0 = ScalarField::constant(grid, 1.0 / config.r_bar(problem));
    homotopy_solve_from(problem, config, &w0)
}

/// Continue `t: 0 → 1` starting the `t = 0` Picard run from `w_init`.
/// Halves the step when Picard fails and doubles it after two easy steps.
pub fn homotopy_solve_from(problem: &AnnulusProblem, config: &HomotopyConfig, w_init: &ScalarField) -> Result<HomotopyState> {
    config.validate(problem)?;
    check_grid(w_init, problem)?;
    if !config.force {
        let report = hypothesis_check(problem, w_init.grid())?;
        if !report.satisfied() {
            return Err(Error::HypothesisViolated(report.describe()));
        }
    }
    let easy = (config.max_iterations / 4).max(1);
    let mut trace = Vec::new();
    let mut history = Vec::new();
    let mut excursion: f64 = 0.0;
    let (mut accepted, mut rejected) = (0, 0);

    let first = picard_at_t(w_init, 0.0, problem, config)?;
    trace.extend_from_slice(&first.trace);
    if !first.converged {
        return finish(problem, config, first.w, 0.0, SolveStatus::StepUnderflow { t: 0.0, step: 0.0 }, trace, history, excursion, 0, 1);
    }
    history.push((0.0, first.residual));
    excursion = excursion.max(band_excursion(&first.w, problem));
    let mut w = first.w;
    let mut t = 0.0;
    let mut dt = config.dt;
    let mut easy_run = 0;
    while t < 1.0 {
        let t_next = (t + dt).min(1.0);
        let out = picard_at_t(&w, t_next, problem, config)?;
        trace.extend_from_slice(&out.trace);
        if out.converged {
            accepted += 1;
            t = t_next;
            history.push((t, out.residual));
            excursion = excursion.max(band_excursion(&out.w, problem));
            w = out.w;
            if out.iterations <= easy {
                easy_run += 1;
                if easy_run >= 2 {
                    dt = (2.0 * dt).min(1.0);
                    easy_run = 0;
                }
            } else {
                easy_run = 0;
            }
        } else {
            rejected += 1;
            easy_run = 0;
            dt *= 0.5;
            if dt < config.dt_min {
                let status = SolveStatus::StepUnderflow { t, step: dt };
                return finish(problem, config, w, t, status, trace, history, excursion, accepted, rejected);
            }
        }
    }
    finish(problem, config, w, 1.0, SolveStatus::Converged, trace, history, excursion, accepted, rejected)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    problem: &AnnulusProblem,
    config: &HomotopyConfig,
    w: ScalarField,
    t: f64,
    status: SolveStatus,
    trace: Vec<TraceRow>,
    residual_history: Vec<(f64, f64)>,
    band_excursion: f64,
    accepted_steps: usize,
    rejected_steps: usize,
) -> Result<HomotopyState> {
    let rho = w.map(|v| 1.0 / v);
    let barrier = barrier_check(&w, problem, 10.0 * config.tolerance(problem.dimension()));
    Ok(HomotopyState {
        t,
        w,
        rho,
        status,
        trace,
        residual_history,
        band_excursion,
        barrier,
        accepted_steps,
        rejected_steps,
    })
}

/// CSV `t, iteration, step, residual, sigma`.
pub fn trace_csv(trace: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in trace {
        w.serialize(row).map_err(crate::kummer::csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
