//! Small symmetric matrices in chart coordinates and fields of them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::SphereGrid;

/// Dimension of the sphere: the circle S^1 or the two-sphere S^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    #[serde(rename = "1")]
    Circle,
    #[serde(rename = "2")]
    Sphere,
}

impl Dimension {
    pub fn from_n(n: usize) -> crate::Result<Self> {
        match n {
            1 => Ok(Dimension::Circle),
            2 => Ok(Dimension::Sphere),
            other => Err(crate::Error::UnsupportedDimension(other)),
        }
    }

    /// The intrinsic dimension n.
    pub fn n(self) -> usize {
        match self {
            Dimension::Circle => 1,
            Dimension::Sphere => 2,
        }
    }

    pub fn nf(self) -> f64 {
        self.n() as f64
    }

    /// Volume of the unit sphere S^n.
    pub fn volume(self) -> f64 {
        match self {
            Dimension::Circle => 2.0 * std::f64::consts::PI,
            Dimension::Sphere => 4.0 * std::f64::consts::PI,
        }
    }
}

/// Chart vector (covariant or contravariant components, by context).
pub type ChartVec = [f64; 2];

/// Symmetric n x n matrix with n in {1, 2}. Only the leading n x n block is
/// meaningful; the remaining entries are kept at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMat {
    pub dim: Dimension,
    pub a: [[f64; 2]; 2],
}

impl SymMat {
    pub fn zeros(dim: Dimension) -> Self {
        SymMat { dim, a: [[0.0; 2]; 2] }
    }

    pub fn identity(dim: Dimension) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim.n() {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn diag(dim: Dimension, d: [f64; 2]) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim.n() {
            m.a[i][i] = d[i];
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn(dim: Dimension, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        let n = dim.n();
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.a[i][j] = v;
                m.a[j][i] = v;
            }
        }
        m
    }

    /// Outer product v ⊗ v.
    pub fn outer(dim: Dimension, v: ChartVec) -> Self {
        Self::from_fn(dim, |i, j| v[i] * v[j])
    }

    pub fn n(&self) -> usize {
        self.dim.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(self.dim, |i, j| f(self.a[i][j]))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[i][j] + other.a[i][j])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[i][j] - other.a[i][j])
    }

    /// Linear combination `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[i][j] + s * other.a[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.a[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            Dimension::Circle => self.a[0][0],
            Dimension::Sphere => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
        }
    }

    pub fn inverse(&self) -> Self {
        match self.dim {
            Dimension::Circle => Self::diag(self.dim, [1.0 / self.a[0][0], 0.0]),
            Dimension::Sphere => {
                let d = self.det();
                SymMat {
                    dim: self.dim,
                    a: [
                        [self.a[1][1] / d, -self.a[0][1] / d],
                        [-self.a[1][0] / d, self.a[0][0] / d],
                    ],
                }
            }
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: ChartVec) -> ChartVec {
        let mut out = [0.0; 2];
        let n = self.n();
        for i in 0..n {
            for j in 0..n {
                out[i] += self.a[i][j] * v[j];
            }
        }
        out
    }

    /// The quadratic form `v^T A v`.
    pub fn quad(&self, v: ChartVec) -> f64 {
        let av = self.apply(v);
        (0..self.n()).map(|i| av[i] * v[i]).sum()
    }

    /// Bilinear form `u^T A v`.
    pub fn bilinear(&self, u: ChartVec, v: ChartVec) -> f64 {
        let av = self.apply(v);
        (0..self.n()).map(|i| av[i] * u[i]).sum()
    }

    /// `A M A` for symmetric `A` and `M`; symmetric by construction.
    pub fn sandwich(&self, middle: &Self) -> Self {
        let n = self.n();
        Self::from_fn(self.dim, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += self.a[i][k] * middle.a[k][l] * self.a[l][j];
                }
            }
            s
        })
    }

    /// `A^T M A` with a general (possibly non-symmetric) matrix `A`.
    pub fn congruence(&self, a: &[[f64; 2]; 2]) -> Self {
        let n = self.n();
        Self::from_fn(self.dim, |i, j| {
            let mut s = 0.0;
            for k in 0..n {
                for l in 0..n {
                    s += a[k][i] * self.a[k][l] * a[l][j];
                }
            }
            s
        })
    }

    /// Mixed tensor `self * other` (generally not symmetric), e.g. `e^{is} κ_sj`.
    pub fn mixed(&self, other: &Self) -> [[f64; 2]; 2] {
        let n = self.n();
        let mut out = [[0.0; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i][j] += self.a[i][k] * other.a[k][j];
                }
            }
        }
        out
    }

    /// Lower Cholesky factor `L` with `A = L L^T`. Requires positive definiteness.
    pub fn cholesky(&self) -> [[f64; 2]; 2] {
        let l11 = self.a[0][0].sqrt();
        match self.dim {
            Dimension::Circle => [[l11, 0.0], [0.0, 0.0]],
            Dimension::Sphere => {
                let l21 = self.a[1][0] / l11;
                let l22 = (self.a[1][1] - l21 * l21).sqrt();
                [[l11, 0.0], [l21, l22]]
            }
        }
    }

    /// Eigenvalues in ascending order with unit eigenvectors (as columns of `vectors`).
    pub fn eigen(&self) -> SymEigen {
        match self.dim {
            Dimension::Circle => SymEigen {
                values: [self.a[0][0], 0.0],
                vectors: [[1.0, 0.0], [0.0, 0.0]],
            },
            Dimension::Sphere => {
                let (a, b, d) = (self.a[0][0], self.a[0][1], self.a[1][1]);
                let mean = 0.5 * (a + d);
                let half = 0.5 * (a - d);
                let r = half.hypot(b);
                let lo = mean - r;
                let hi = mean + r;
                // eigenvector of `hi`: angle with tan(2φ) = 2b / (a - d)
                let phi = 0.5 * b.atan2(half);
                let (s, c) = phi.sin_cos();
                SymEigen {
                    values: [lo, hi],
                    vectors: [[-s, c], [c, s]],
                }
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max((self.a[i][j] - other.a[i][j]).abs());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::zeros(self.dim))
    }
}

/// Eigen-decomposition of a [`SymMat`]. `vectors[r][c]`: component `r` of eigenvector `c`.
#[derive(Clone, Copy, Debug)]
pub struct SymEigen {
    pub values: [f64; 2],
    pub vectors: [[f64; 2]; 2],
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> ChartVec {
        [self.vectors[0][k], self.vectors[1][k]]
    }
}

/// Symmetric covariant 2-tensor field on a grid, stored in chart components.
/// A field may live on a subset of the grid points (its support), e.g. for a
/// reflector defined only over part of the sphere.
#[derive(Clone, Debug)]
pub struct SymTensorField2 {
    grid: Arc<SphereGrid>,
    support: Option<Arc<[usize]>>,
    values: Vec<SymMat>,
}

impl SymTensorField2 {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<SymMat>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SymTensorField2 { grid, support: None, values }
    }

    /// Field on the grid points listed in `support`; `values[k]` sits at `support[k]`.
    pub fn on_support(grid: Arc<SphereGrid>, support: Option<Arc<[usize]>>, values: Vec<SymMat>) -> Self {
        if let Some(s) = &support {
            debug_assert_eq!(s.len(), values.len());
        }
        SymTensorField2 { grid, support, values }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn support(&self) -> Option<&Arc<[usize]>> {
        self.support.as_ref()
    }

    /// Grid index of the `k`-th stored value.
    pub fn grid_index(&self, k: usize) -> usize {
        self.support.as_ref().map_or(k, |s| s[k])
    }

    pub fn values(&self) -> &[SymMat] {
        &self.values
    }

    pub fn at(&self, k: usize) -> &SymMat {
        &self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Components in the orthonormal frame `E_a = L^{-T}` built from the Cholesky
    /// factor of the metric, so that `T = E^T F E` with `E = L^T`.
    pub fn frame(&self) -> Vec<SymMat> {
        let metric = self.grid.metric();
        self.values
            .iter()
            .enumerate()
            .map(|(k, t)| metric.at(self.grid_index(k)).to_frame(t))
            .collect()
    }

    /// `e^{ij} T_ij` at every point.
    pub fn trace(&self) -> Vec<f64> {
        let metric = self.grid.metric();
        self.values
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let m = metric.at(self.grid_index(k));
                m.inverse.mixed(t).iter().take(t.n()).enumerate().map(|(i, r)| r[i]).sum()
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}
