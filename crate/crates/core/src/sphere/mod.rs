//! Discrete S^1 and S^2: grids, metric data, spectral transforms and
//! differential operators.

mod fd;
mod field;
mod grid;
pub mod legendre;
mod ops;
mod spectral;
mod tensor;

pub use fd::fornberg_weights;
pub use field::{CovectorField, ScalarField, ScalarFieldDocument};
pub use grid::{
    axpy, dot, norm, normalize, scale, sub, ChartPoint, MetricData, PointMetric, Resolution, SphereGrid, Vec3,
    CIRCLE_MAX_POINTS, CIRCLE_MIN_POINTS, SPHERE_MAX_DEGREE, SPHERE_MIN_DEGREE,
};
pub use ops::{
    apply_shifted_laplacian, chart_derivatives, covariant_hessian, covariant_hessian_with, gradient, gradient_with,
    integrate, laplace_beltrami, laplacian_eigenvalue, solve_shifted, solve_shifted_laplacian, ChartDerivatives,
    DerivativeMethod,
};
pub(crate) use ops::covariant_hessian_from;
pub use spectral::{sh_index, sh_len, PointJet, Spectrum};
pub use tensor::{ChartVec, Dimension, SymEigen, SymMat, SymTensorField2};
