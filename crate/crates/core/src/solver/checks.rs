use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kummer::RadialHypersurface;
use crate::raytrace::{ray_rng, uniform_direction};
use crate::sphere::{covariant_hessian, dot, Dimension, ScalarField, Spectrum, SphereGrid, Vec3, sh_index};
use crate::{Error, Result};

use super::homotopy::{homotopy_solve, picard_at_t};
use super::problem::{AnnulusProblem, HomotopyConfig};

const EQUALITY_TOL: f64 = 1e-12;

/// Both residual forms of the mean intensity equation at every point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `Δv + nv − nV − V ḡ(x, 1/v)` with `v = 1/ρ`, `V = (|∇v|² + v²)/(2v)`.
    pub v_form: Vec<f64>,
    /// `S₁(ρ) − n g(x, ρ)`.
    pub direct: Vec<f64>,
    pub sup_v_form: f64,
    pub sup_direct: f64,
    /// `sup |v_form − V · direct|`; the forms share zero sets because this vanishes.
    pub consistency: f64,
}

pub fn residual(rho: &RadialHypersurface, problem: &AnnulusProblem) -> Result<ResidualReport> {
    if rho.dimension() != problem.dimension() {
        return Err(Error::GridMismatch);
    }
    let n = problem.dimension().nf();
    let rows = (0..rho.len())
        .into_par_iter()
        .map(|k| -> Result<[f64; 3]> {
            let p = rho.point(k);
            let v = p.jet.reciprocal();
            let m = &p.metric;
            let dim = m.dim().n();
            let mut lap = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    lap += m.inverse.a[i][j] * v.hess.a[i][j];
                }
            }
            let big_v = (m.norm2_covector(v.d) + v.rho * v.rho) / (2.0 * v.rho);
            let (gb, _) = problem.g_bar(m, p.rho())?;
            let vf = lap + n * v.rho - n * big_v - big_v * gb;
            let direct = p.s1_trace() - gb;
            Ok([vf, direct, (vf - big_v * direct).abs()])
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = |c: usize| rows.iter().map(|r| r[c].abs()).fold(0.0, f64::max);
    Ok(ResidualReport {
        v_form: rows.iter().map(|r| r[0]).collect(),
        direct: rows.iter().map(|r| r[1]).collect(),
        sup_v_form: sup(0),
        sup_direct: sup(1),
        consistency: sup(2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierStatus {
    /// Holds, and `g` is not identically 1 on the sphere.
    Strict,
    /// Holds with `g ≡ 1`.
    NonStrict,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub x: Vec3,
    pub g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    /// `∂g/∂ρ < 0` at every sample.
    Decreasing,
    /// `∂g/∂ρ ≤ 0`, with equality somewhere.
    NonIncreasing,
    /// `∂g/∂ρ > 0` somewhere.
    Increasing,
}

/// Barrier inequalities `g(x,R₁) ≥ 1`, `g(x,R₂) ≤ 1` and the sign of `∂g/∂ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub inner: BarrierStatus,
    pub outer: BarrierStatus,
    /// Point where `g(x,R₁) − 1` is smallest.
    pub inner_witness: Witness,
    /// Point where `g(x,R₂) − 1` is largest.
    pub outer_witness: Witness,
    pub monotonicity: Monotonicity,
    pub max_dg: f64,
}

impl HypothesisReport {
    pub fn satisfied(&self) -> bool {
        self.inner != BarrierStatus::Violated && self.outer != BarrierStatus::Violated
    }

    pub fn strict(&self) -> bool {
        self.inner == BarrierStatus::Strict && self.outer == BarrierStatus::Strict
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.inner == BarrierStatus::Violated {
            let w = self.inner_witness;
            parts.push(format!("g(x,R1) = {} < 1 at point {} {:?}", w.g, w.index, w.x));
        }
        if self.outer == BarrierStatus::Violated {
            let w = self.outer_witness;
            parts.push(format!("g(x,R2) = {} > 1 at point {} {:?}", w.g, w.index, w.x));
        }
        if parts.is_empty() {
            format!("barriers hold ({:?}, {:?}), dg/drho {:?}", self.inner, self.outer, self.monotonicity)
        } else {
            parts.join("; ")
        }
    }
}

const MONOTONICITY_SAMPLES: usize = 9;

pub fn hypothesis_check(problem: &AnnulusProblem, grid: &Arc<SphereGrid>) -> Result<HypothesisReport> {
    if grid.dimension() != problem.dimension() {
        return Err(Error::GridMismatch);
    }
    let (r1, r2) = (problem.r1(), problem.r2());
    let rows = grid
        .metric()
        .points()
        .par_iter()
        .map(|m| -> Result<(f64, f64, f64)> {
            let g1 = problem.g(m, r1)?;
            let g2 = problem.g(m, r2)?;
            let mut dg = f64::NEG_INFINITY;
            for s in 0..MONOTONICITY_SAMPLES {
                let r = r1 + (r2 - r1) * s as f64 / (MONOTONICITY_SAMPLES - 1) as f64;
                dg = dg.max(problem.source().eval(m, r, problem.fd_step())?.1);
            }
            Ok((g1, g2, dg))
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = |k: usize, g: f64| Witness { index: k, x: grid.ambient(k), g };
    let (k1, g1min) = rows.iter().enumerate().map(|(k, r)| (k, r.0)).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    let (k2, g2max) =
        rows.iter().enumerate().map(|(k, r)| (k, r.1)).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let classify = |ok: bool, differs: bool| match (ok, differs) {
        (false, _) => BarrierStatus::Violated,
        (true, true) => BarrierStatus::Strict,
        (true, false) => BarrierStatus::NonStrict,
    };
    let inner = classify(g1min >= 1.0 - EQUALITY_TOL, rows.iter().any(|r| (r.0 - 1.0).abs() > EQUALITY_TOL));
    let outer = classify(g2max <= 1.0 + EQUALITY_TOL, rows.iter().any(|r| (r.1 - 1.0).abs() > EQUALITY_TOL));
    let max_dg = rows.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let monotonicity = if max_dg < 0.0 {
        Monotonicity::Decreasing
    } else if max_dg <= EQUALITY_TOL {
        Monotonicity::NonIncreasing
    } else {
        Monotonicity::Increasing
    };
    Ok(HypothesisReport {
        inner,
        outer,
        inner_witness: witness(k1, g1min),
        outer_witness: witness(k2, g2max),
        monotonicity,
        max_dg,
    })
}

/// Position of a solution `w` relative to the barrier band `[1/R₂, 1/R₁]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum BarrierClass {
    /// `w ≡ 1/R₁`
    ConstantAtInner,
    /// `w ≡ 1/R₂`
    ConstantAtOuter,
    StrictlyInterior,
    /// Touches or leaves the band without being constant there.
    Violation { index: usize, value: f64 },
}

pub fn barrier_check(w: &ScalarField, problem: &AnnulusProblem, tol: f64) -> BarrierClass {
    let (lo, hi) = (1.0 / problem.r2(), 1.0 / problem.r1());
    let (min, max) = (w.min(), w.max());
    if max - min <= tol {
        if (min - hi).abs() <= tol && (max - hi).abs() <= tol {
            return BarrierClass::ConstantAtInner;
        }
        if (min - lo).abs() <= tol && (max - lo).abs() <= tol {
            return BarrierClass::ConstantAtOuter;
        }
    }
    match w.values().iter().enumerate().find(|(_, &v)| !(v > lo + tol && v < hi - tol)) {
        Some((index, &value)) => BarrierClass::Violation { index, value },
        None => BarrierClass::StrictlyInterior,
    }
}

/// Extremes of `S₁` on a closed reflector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanIntensityBounds {
    pub min: f64,
    pub max: f64,
    pub n: f64,
    /// `min ≤ n + tol` and `max ≥ n − tol`.
    pub straddles: bool,
    /// `max − min < tol`.
    pub constant_mean: bool,
    /// Relative oscillation `(max ρ − min ρ)/mean ρ`.
    pub rho_oscillation: f64,
    pub passed: bool,
}

impl MeanIntensityBounds {
    pub fn ensure(&self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::CheckFailed(format!(
                "S1 range [{}, {}] against n = {} (rho oscillation {})",
                self.min, self.max, self.n, self.rho_oscillation
            )))
        }
    }
}

/// Some point has `S₁ ≥ n` and some has `S₁ ≤ n`; `S₁ ≡ n` forces a sphere.
pub fn mean_intensity_bounds_check(rho: &RadialHypersurface, tol: f64) -> Result<MeanIntensityBounds> {
    if !rho.is_closed() || rho.support().is_some() {
        return Err(Error::InvalidShape("mean intensity bounds need a closed reflector".into()));
    }
    let s1: Vec<f64> = (0..rho.len()).into_par_iter().map(|k| rho.point(k).s1_trace()).collect();
    let min = s1.iter().copied().fold(f64::INFINITY, f64::min);
    let max = s1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = rho.dimension().nf();
    let vals = rho.rho_values();
    let rmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let rho_oscillation = (rmax - rmin) / mean;
    let straddles = min <= n + tol && max >= n - tol;
    let constant_mean = max - min < tol;
    let passed = straddles && (!constant_mean || rho_oscillation < tol);
    Ok(MeanIntensityBounds { min, max, n, straddles, constant_mean, rho_oscillation, passed })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub trials: usize,
    pub strict_monotone: bool,
    /// Pairwise `sup |ρ_a/mean ρ_a − ρ_b/mean ρ_b|`.
    pub normalized_discrepancy: f64,
    /// Pairwise `sup |ρ_a − ρ_b|`.
    pub raw_discrepancy: f64,
    /// Mean of each solution.
    pub means: Vec<f64>,
    pub threshold: f64,
    pub passed: bool,
}

/// Smooth multiplicative perturbation `1 + a Σ c_k ⟨x, u_k⟩` with random axes.
fn perturbation(grid: &Arc<SphereGrid>, seed: u64, trial: usize, amplitude: f64) -> ScalarField {
    let mut rng = ray_rng(seed, trial as u64);
    let dim = grid.dimension();
    let axes: Vec<(Vec3, f64)> =
        (0..3).map(|_| (uniform_direction(dim, &mut rng), rng.random::<f64>() * 2.0 - 1.0)).collect();
    ScalarField::from_fn(grid, |m| 1.0 + amplitude * axes.iter().map(|(u, c)| c * dot(&m.x, u)).sum::<f64>() / 3.0)
}

/// Solve once by continuation, then rerun the `t = 1` Picard iteration from
/// `trials` perturbed copies of that solution and compare the results.
pub fn uniqueness_check(
    problem: &AnnulusProblem,
    config: &HomotopyConfig,
    grid: &Arc<SphereGrid>,
    trials: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let report = hypothesis_check(problem, grid)?;
    if report.monotonicity == crate::solver::Monotonicity::Increasing {
        return Err(Error::HypothesisViolated(format!("dg/drho reaches {} > 0", report.max_dg)));
    }
    let base = homotopy_solve(problem, config, grid)?;
    if !base.converged() {
        return Err(Error::CheckFailed(format!("continuation stopped: {:?}", base.status)));
    }
    let (lo, hi) = (1.0 / problem.r2(), 1.0 / problem.r1());
    let starts: Vec<ScalarField> = (0..trials)
        .map(|k| {
            let p = perturbation(grid, seed, k, 0.05);
            base.w.zip_with(&p, |w, s| (w * s).clamp(lo, hi)).expect("same grid")
        })
        .collect();
    let mut solutions = vec![base.rho.clone()];
    let runs = starts
        .par_iter()
        .map(|w0| picard_at_t(w0, 1.0, problem, config))
        .collect::<Result<Vec<_>>>()?;
    for out in runs {
        if !out.converged {
            return Err(Error::CheckFailed(format!("perturbed Picard run stalled at residual {}", out.residual)));
        }
        solutions.push(out.w.map(|v| 1.0 / v));
    }
    let means: Vec<f64> = solutions.iter().map(|s| s.mean()).collect();
    let mut normalized: f64 = 0.0;
    let mut raw: f64 = 0.0;
    for a in 0..solutions.len() {
        for b in a + 1..solutions.len() {
            for (x, y) in solutions[a].values().iter().zip(solutions[b].values()) {
                normalized = normalized.max((x / means[a] - y / means[b]).abs());
                raw = raw.max((x - y).abs());
            }
        }
    }
    let strict_monotone = report.monotonicity == crate::solver::Monotonicity::Decreasing;
    let threshold = 10.0 * config.tolerance(problem.dimension());
    let passed = normalized < threshold && (!strict_monotone || raw < threshold);
    Ok(UniquenessReport {
        trials,
        strict_monotone,
        normalized_discrepancy: normalized,
        raw_discrepancy: raw,
        means,
        threshold,
        passed,
    })
}

/// Spectrum of `h ↦ Δh − (nε/2) h` measured on one harmonic per degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationReport {
    /// `(degree, Rayleigh quotient)`.
    pub eigenvalues: Vec<(usize, f64)>,
    pub min_abs: f64,
    pub argmin_degree: usize,
}

/// Rayleigh quotients `∫ h Φ(h) / ∫ h²` of the linearization at `w₀ = 1/R̄`,
/// `t = 0`, with the Laplacian taken as the trace of the covariant Hessian.
pub fn linearization_kernel_check(grid: &Arc<SphereGrid>, epsilon: f64) -> LinearizationReport {
    let dim = grid.dimension();
    let shift = 0.5 * dim.nf() * epsilon;
    let top = grid.degree().min(24);
    let eigenvalues: Vec<(usize, f64)> = (0..=top)
        .into_par_iter()
        .map(|l| {
            let spec = match dim {
                Dimension::Circle => {
                    let mut a = vec![0.0; l + 1];
                    a[l] = 1.0;
                    Spectrum::Circle { a, b: vec![0.0; l + 1] }
                }
                Dimension::Sphere => {
                    let mut c = vec![0.0; (l + 1) * (l + 1)];
                    c[sh_index(l, 0)] = 1.0;
                    Spectrum::Sphere(c)
                }
            };
            let h = ScalarField::from_spectrum(grid, spec);
            let lap = covariant_hessian(&h).trace();
            let phi: Vec<f64> = lap.iter().zip(h.values()).map(|(a, b)| a - shift * b).collect();
            let num: Vec<f64> = phi.iter().zip(h.values()).map(|(a, b)| a * b).collect();
            let den: Vec<f64> = h.values().iter().map(|b| b * b).collect();
            (l, grid.quadrature(&num) / grid.quadrature(&den))
        })
        .collect();
    let (argmin_degree, min_abs) =
        eigenvalues.iter().map(|&(l, e)| (l, e.abs())).fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    LinearizationReport { eigenvalues, min_abs, argmin_degree }
}
