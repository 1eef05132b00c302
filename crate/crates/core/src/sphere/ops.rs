//! Differential operators, quadrature and the shifted Laplacian solve.

use std::sync::Arc;

use super::fd;
use super::field::{CovectorField, ScalarField};
use super::grid::SphereGrid;
use super::spectral::Spectrum;
use super::tensor::{ChartVec, Dimension, SymMat, SymTensorField2};
use crate::{Error, Result};

/// How chart derivatives are obtained from point values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DerivativeMethod {
    /// Exact differentiation of the spectral projection.
    #[default]
    Spectral,
    /// Fourth-order centered differences in the chart.
    FiniteDifference,
}

/// Chart partial derivatives `∂_i f` and `∂_ij f` at every grid point.
#[derive(Clone, Debug)]
pub struct ChartDerivatives {
    pub d: Vec<ChartVec>,
    pub d2: Vec<SymMat>,
}

pub fn chart_derivatives(f: &ScalarField, method: DerivativeMethod) -> ChartDerivatives {
    match method {
        DerivativeMethod::Spectral => spectral_derivatives(f),
        DerivativeMethod::FiniteDifference => fd::derivatives(f),
    }
}

fn spectral_derivatives(f: &ScalarField) -> ChartDerivatives {
    let grid = f.grid();
    let t = grid.transform();
    let spec = f.spectrum();
    match grid.dimension() {
        Dimension::Circle => {
            let d1 = t.synthesize(spec, [1, 0]);
            let d2 = t.synthesize(spec, [2, 0]);
            ChartDerivatives {
                d: d1.iter().map(|&v| [v, 0.0]).collect(),
                d2: d2.iter().map(|&v| SymMat::diag(Dimension::Circle, [v, 0.0])).collect(),
            }
        }
        Dimension::Sphere => {
            let ft = t.synthesize(spec, [1, 0]);
            let fp = t.synthesize(spec, [0, 1]);
            let ftt = t.synthesize(spec, [2, 0]);
            let ftp = t.synthesize(spec, [1, 1]);
            let fpp = t.synthesize(spec, [0, 2]);
            ChartDerivatives {
                d: ft.iter().zip(&fp).map(|(&a, &b)| [a, b]).collect(),
                d2: (0..ft.len())
                    .map(|k| SymMat { dim: Dimension::Sphere, a: [[ftt[k], ftp[k]], [ftp[k], fpp[k]]] })
                    .collect(),
            }
        }
    }
}

pub fn gradient(f: &ScalarField) -> CovectorField {
    gradient_with(f, DerivativeMethod::Spectral)
}

pub fn gradient_with(f: &ScalarField, method: DerivativeMethod) -> CovectorField {
    let values = match method {
        DerivativeMethod::Spectral => {
            let grid = f.grid();
            let t = grid.transform();
            match grid.dimension() {
                Dimension::Circle => t.synthesize(f.spectrum(), [1, 0]).into_iter().map(|v| [v, 0.0]).collect(),
                Dimension::Sphere => {
                    let ft = t.synthesize(f.spectrum(), [1, 0]);
                    let fp = t.synthesize(f.spectrum(), [0, 1]);
                    ft.into_iter().zip(fp).map(|(a, b)| [a, b]).collect()
                }
            }
        }
        DerivativeMethod::FiniteDifference => fd::derivatives(f).d,
    };
    CovectorField { grid: f.grid().clone(), values }
}

/// Covariant Hessian `∇_ij f = ∂_ij f − Γ^k_ij ∂_k f`.
pub fn covariant_hessian(f: &ScalarField) -> SymTensorField2 {
    covariant_hessian_with(f, DerivativeMethod::Spectral)
}

pub fn covariant_hessian_with(f: &ScalarField, method: DerivativeMethod) -> SymTensorField2 {
    let cd = chart_derivatives(f, method);
    covariant_hessian_from(f.grid(), &cd)
}

pub(crate) fn covariant_hessian_from(grid: &Arc<SphereGrid>, cd: &ChartDerivatives) -> SymTensorField2 {
    let values = grid
        .metric()
        .points()
        .iter()
        .zip(cd.d.iter().zip(&cd.d2))
        .map(|(m, (d, d2))| m.covariant_hessian(*d, d2))
        .collect();
    SymTensorField2::new(grid.clone(), values)
}

/// Eigenvalue of the Laplace-Beltrami operator on degree-`l` harmonics.
pub fn laplacian_eigenvalue(dim: Dimension, l: usize) -> f64 {
    let lf = l as f64;
    -lf * (lf + dim.nf() - 1.0)
}

/// `Δf`, diagonal in the harmonic basis.
pub fn laplace_beltrami(f: &ScalarField) -> ScalarField {
    let dim = f.grid().dimension();
    let spec = f.spectrum().map_degree(|l| laplacian_eigenvalue(dim, l));
    ScalarField::from_spectrum(f.grid(), spec)
}

/// Quadrature value of `∫ f dσ`, summed in grid order.
pub fn integrate(f: &ScalarField) -> f64 {
    f.grid().quadrature(f.values())
}

/// `Δ̂v = Δv + (n/2) v`.
pub fn apply_shifted_laplacian(v: &ScalarField) -> ScalarField {
    let dim = v.grid().dimension();
    let half_n = 0.5 * dim.nf();
    let spec = v.spectrum().map_degree(|l| laplacian_eigenvalue(dim, l) + half_n);
    ScalarField::from_spectrum(v.grid(), spec)
}

/// Solve `Δv + (n/2) v = rhs`. The operator has eigenvalues `n/2 − l(l+n−1)`,
/// none of which vanish.
pub fn solve_shifted_laplacian(rhs: &ScalarField) -> ScalarField {
    solve_shifted(rhs, 0.0).expect("Δ + n/2 is invertible on S^n")
}

/// Solve `Δv + (n/2 − σ) v = rhs`.
pub fn solve_shifted(rhs: &ScalarField, sigma: f64) -> Result<ScalarField> {
    let dim = rhs.grid().dimension();
    let half_n = 0.5 * dim.nf();
    let singular = (0..=rhs.grid().degree())
        .map(|l| laplacian_eigenvalue(dim, l) + half_n - sigma)
        .any(|ev| ev.abs() < 1e-12);
    if singular {
        return Err(Error::InvalidProblem(format!("shift {sigma} makes Δ + n/2 − σ singular")));
    }
    let spec: Spectrum = rhs.spectrum().map_degree(|l| 1.0 / (laplacian_eigenvalue(dim, l) + half_n - sigma));
    Ok(ScalarField::from_spectrum(rhs.grid(), spec))
}
