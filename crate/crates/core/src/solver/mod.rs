//! Homotopy continuation for the prescribed mean intensity equation
//! `S₁(ρ) = n g(x, ρ)`, solved for `w = 1/ρ` by Picard iteration on
//! `Δ̂w = Q^t(x, w, ∇w)` with `Δ̂ = Δ + n/2`.

mod checks;
mod homotopy;
mod problem;

pub use checks::{
    barrier_check, hypothesis_check, linearization_kernel_check, mean_intensity_bounds_check, residual,
    uniqueness_check, BarrierClass, BarrierStatus, HypothesisReport, LinearizationReport, MeanIntensityBounds,
    Monotonicity, ResidualReport, UniquenessReport, Witness,
};
pub use homotopy::{
    fixed_point_residual, homotopy_solve, homotopy_solve_from, linear_step_t, picard_at_t, rhs_q_t, trace_csv,
    HomotopyState, PicardOutcome, SolveStatus, TraceRow,
};
pub use problem::{AnnulusProblem, HomotopyConfig, PicardShift, ProblemSpec, SourceSpec, SourceTerm};
