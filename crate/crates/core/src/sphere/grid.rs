//! Collocation grids on S^1 and S^2 with per-point metric data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::legendre::gauss_legendre;
use super::spectral::Transform;
use super::tensor::{ChartVec, Dimension, SymMat};
use crate::{Error, Result};

pub type Vec3 = [f64; 3];

pub const CIRCLE_MIN_POINTS: usize = 8;
pub const CIRCLE_MAX_POINTS: usize = 8192;
pub const SPHERE_MIN_DEGREE: usize = 4;
pub const SPHERE_MAX_DEGREE: usize = 128;

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn axpy(a: &Vec3, s: f64, b: &Vec3) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn normalize(a: &Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Grid sizes. The S^2 latitude/longitude counts default to a 3/2-oversampled
/// Gauss-Legendre grid for the truncation degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "dimension")]
pub enum Resolution {
    #[serde(rename = "1")]
    Circle { m: usize },
    #[serde(rename = "2")]
    Sphere { l_max: usize, n_lat: usize, n_lon: usize },
}

impl Resolution {
    pub fn circle(m: usize) -> Self {
        Resolution::Circle { m }
    }

    pub fn sphere(l_max: usize) -> Self {
        let n_lat = l_max + 1 + l_max / 2;
        Resolution::Sphere { l_max, n_lat, n_lon: 2 * n_lat }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            Resolution::Circle { .. } => Dimension::Circle,
            Resolution::Sphere { .. } => Dimension::Sphere,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Resolution::Circle { m } => {
                if !(CIRCLE_MIN_POINTS..=CIRCLE_MAX_POINTS).contains(&m) || m % 2 != 0 {
                    return Err(Error::Resolution(format!(
                        "S^1 needs an even point count in {CIRCLE_MIN_POINTS}..={CIRCLE_MAX_POINTS}, got {m}"
                    )));
                }
            }
            Resolution::Sphere { l_max, n_lat, n_lon } => {
                if !(SPHERE_MIN_DEGREE..=SPHERE_MAX_DEGREE).contains(&l_max) {
                    return Err(Error::Resolution(format!(
                        "S^2 truncation degree must lie in {SPHERE_MIN_DEGREE}..={SPHERE_MAX_DEGREE}, got {l_max}"
                    )));
                }
                if n_lat < l_max + 1 || n_lon < 2 * l_max + 2 || n_lon % 2 != 0 {
                    return Err(Error::Resolution(format!(
                        "S^2 grid {n_lat}x{n_lon} too coarse for degree {l_max}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A point of S^n in chart coordinates: `θ` on S^1, `(colatitude, longitude)` on S^2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub dim: Dimension,
    pub u: ChartVec,
}

impl ChartPoint {
    pub fn circle(theta: f64) -> Self {
        ChartPoint { dim: Dimension::Circle, u: [theta, 0.0] }
    }

    pub fn sphere(colatitude: f64, longitude: f64) -> Self {
        ChartPoint { dim: Dimension::Sphere, u: [colatitude, longitude] }
    }

    /// Chart coordinates of a unit ambient vector. On S^1 the third component is ignored.
    pub fn from_ambient(dim: Dimension, x: &Vec3) -> Self {
        match dim {
            Dimension::Circle => {
                let t = x[1].atan2(x[0]);
                ChartPoint::circle(if t < 0.0 { t + 2.0 * PI } else { t })
            }
            Dimension::Sphere => {
                let r = norm(x);
                let colat = (x[2] / r).clamp(-1.0, 1.0).acos();
                let mut lon = x[1].atan2(x[0]);
                if lon < 0.0 {
                    lon += 2.0 * PI;
                }
                ChartPoint::sphere(colat, lon)
            }
        }
    }

    /// Displaced point `u + h * direction` in chart coordinates.
    pub fn shifted(&self, direction: usize, h: f64) -> Self {
        let mut u = self.u;
        u[direction] += h;
        ChartPoint { dim: self.dim, u }
    }

    pub fn ambient(&self) -> Vec3 {
        match self.dim {
            Dimension::Circle => {
                let (s, c) = self.u[0].sin_cos();
                [c, s, 0.0]
            }
            Dimension::Sphere => {
                let (st, ct) = self.u[0].sin_cos();
                let (sp, cp) = self.u[1].sin_cos();
                [st * cp, st * sp, ct]
            }
        }
    }

    pub fn metric(&self) -> PointMetric {
        PointMetric::at(*self)
    }
}

/// Metric data of the round sphere at one chart point: the embedding, chart
/// tangent vectors `x_i`, `e_ij`, `e^ij`, Christoffel symbols and the
/// Cholesky factor of `e` used for the orthonormal frame.
#[derive(Clone, Copy, Debug)]
pub struct PointMetric {
    pub point: ChartPoint,
    pub x: Vec3,
    pub tangents: [Vec3; 2],
    pub metric: SymMat,
    pub inverse: SymMat,
    pub det: f64,
    /// `christoffel[k][i][j] = Γ^k_ij`
    pub christoffel: [[[f64; 2]; 2]; 2],
    pub chol: [[f64; 2]; 2],
    pub chol_inv_t: [[f64; 2]; 2],
}

impl PointMetric {
    pub fn at(point: ChartPoint) -> Self {
        let dim = point.dim;
        let x = point.ambient();
        let (tangents, metric, christoffel) = match dim {
            Dimension::Circle => {
                let (s, c) = point.u[0].sin_cos();
                (
                    [[-s, c, 0.0], [0.0; 3]],
                    SymMat::identity(dim),
                    [[[0.0; 2]; 2]; 2],
                )
            }
            Dimension::Sphere => {
                let (st, ct) = point.u[0].sin_cos();
                let (sp, cp) = point.u[1].sin_cos();
                let mut gamma = [[[0.0; 2]; 2]; 2];
                gamma[0][1][1] = -st * ct;
                gamma[1][0][1] = ct / st;
                gamma[1][1][0] = ct / st;
                (
                    [[ct * cp, ct * sp, -st], [-st * sp, st * cp, 0.0]],
                    SymMat::diag(dim, [1.0, st * st]),
                    gamma,
                )
            }
        };
        let chol = metric.cholesky();
        let chol_inv_t = match dim {
            Dimension::Circle => [[1.0 / chol[0][0], 0.0], [0.0, 0.0]],
            Dimension::Sphere => {
                // L^{-1} for lower-triangular L, then transpose
                let i11 = 1.0 / chol[0][0];
                let i22 = 1.0 / chol[1][1];
                let i21 = -chol[1][0] * i11 * i22;
                [[i11, i21], [0.0, i22]]
            }
        };
        PointMetric {
            point,
            x,
            tangents,
            metric,
            inverse: metric.inverse(),
            det: metric.det(),
            christoffel,
            chol,
            chol_inv_t,
        }
    }

    pub fn dim(&self) -> Dimension {
        self.point.dim
    }

    /// Raise an index: `v^i = e^{ij} v_j`.
    pub fn raise(&self, v: ChartVec) -> ChartVec {
        self.inverse.apply(v)
    }

    /// `|v|^2 = e^{ij} v_i v_j` for a covector.
    pub fn norm2_covector(&self, v: ChartVec) -> f64 {
        self.inverse.quad(v)
    }

    /// Ambient vector `v^i x_i` from contravariant components.
    pub fn push_vector(&self, v: ChartVec) -> Vec3 {
        let mut out = [0.0; 3];
        for i in 0..self.dim().n() {
            out = axpy(&out, v[i], &self.tangents[i]);
        }
        out
    }

    /// Ambient gradient `e^{ij} f_j x_i` of a function with chart derivatives `f_j`.
    pub fn ambient_gradient(&self, df: ChartVec) -> Vec3 {
        self.push_vector(self.raise(df))
    }

    /// Frame components `L^{-1} T L^{-T}`.
    pub fn to_frame(&self, t: &SymMat) -> SymMat {
        t.congruence(&self.chol_inv_t)
    }

    /// Chart components `L F L^T` from frame components.
    pub fn from_frame(&self, f: &SymMat) -> SymMat {
        let lt = [[self.chol[0][0], self.chol[1][0]], [self.chol[0][1], self.chol[1][1]]];
        f.congruence(&lt)
    }

    /// Covariant Hessian `∂_ij f − Γ^k_ij ∂_k f` from chart partials.
    pub fn covariant_hessian(&self, df: ChartVec, d2f: &SymMat) -> SymMat {
        let n = self.dim().n();
        SymMat::from_fn(self.dim(), |i, j| {
            let mut v = d2f.a[i][j];
            for k in 0..n {
                v -= self.christoffel[k][i][j] * df[k];
            }
            v
        })
    }
}

/// Per-point metric data of a grid.
#[derive(Clone, Debug)]
pub struct MetricData {
    points: Vec<PointMetric>,
}

impl MetricData {
    pub fn points(&self) -> &[PointMetric] {
        &self.points
    }

    pub fn at(&self, k: usize) -> &PointMetric {
        &self.points[k]
    }
}

/// Discrete S^n with quadrature weights, metric data, and spectral transforms.
#[derive(Debug)]
pub struct SphereGrid {
    resolution: Resolution,
    weights: Vec<f64>,
    metric: MetricData,
    transform: Transform,
}

impl PartialEq for SphereGrid {
    fn eq(&self, other: &Self) -> bool {
        self.resolution == other.resolution
    }
}

impl SphereGrid {
    pub fn new(resolution: Resolution) -> Result<Self> {
        resolution.validate()?;
        let (points, weights) = match resolution {
            Resolution::Circle { m } => {
                let h = 2.0 * PI / m as f64;
                let pts = (0..m).map(|k| ChartPoint::circle(k as f64 * h)).collect::<Vec<_>>();
                (pts, vec![h; m])
            }
            Resolution::Sphere { n_lat, n_lon, .. } => {
                let (nodes, gw) = gauss_legendre(n_lat);
                let dphi = 2.0 * PI / n_lon as f64;
                let mut pts = Vec::with_capacity(n_lat * n_lon);
                let mut w = Vec::with_capacity(n_lat * n_lon);
                for (c, wj) in nodes.iter().zip(&gw) {
                    let colat = c.acos();
                    for k in 0..n_lon {
                        pts.push(ChartPoint::sphere(colat, k as f64 * dphi));
                        w.push(wj * dphi);
                    }
                }
                (pts, w)
            }
        };
        let metric = MetricData { points: points.iter().map(|p| p.metric()).collect() };
        let transform = Transform::new(&resolution);
        Ok(SphereGrid { resolution, weights, metric, transform })
    }

    pub fn circle(m: usize) -> Result<Self> {
        Self::new(Resolution::circle(m))
    }

    pub fn sphere(l_max: usize) -> Result<Self> {
        Self::new(Resolution::sphere(l_max))
    }

    pub fn dimension(&self) -> Dimension {
        self.resolution.dimension()
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    /// Spectral truncation degree (M/2 on S^1).
    pub fn degree(&self) -> usize {
        match self.resolution {
            Resolution::Circle { m } => m / 2,
            Resolution::Sphere { l_max, .. } => l_max,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn point(&self, k: usize) -> ChartPoint {
        self.metric.points[k].point
    }

    pub fn ambient(&self, k: usize) -> Vec3 {
        self.metric.points[k].x
    }

    pub(crate) fn transform(&self) -> &Transform {
        &self.transform
    }

    /// A representative mesh width in radians.
    pub fn spacing(&self) -> f64 {
        match self.resolution {
            Resolution::Circle { m } => 2.0 * PI / m as f64,
            Resolution::Sphere { n_lat, .. } => PI / n_lat as f64,
        }
    }

    /// Deterministic sequential quadrature sum.
    pub fn quadrature(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}
