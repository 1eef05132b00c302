//! Expected far-field bin probabilities by change of variables: the reflected
//! density at `y = γ(x)` is `g(x) / |S_n(x)|`, integrated over each bin with
//! tensor Gauss rules and `x` recovered by Newton iteration on `γ`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::kummer::{KummerPoint, RadialHypersurface};
use crate::sphere::legendre::gauss_legendre;
use crate::sphere::{axpy, dot, norm, normalize, sub, Dimension, Vec3};
use crate::{Error, Result};

use super::{EqualAreaBins, SourceDensity};

const TABLE_SPHERE: usize = 4096;
const TABLE_CIRCLE: usize = 1024;
const NEWTON_ITERS: usize = 60;
const NEWTON_TOL: f64 = 1e-13;
const ACCEPT_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-6;

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal basis of the tangent plane of S^n at `x`.
fn tangent_basis(dim: Dimension, x: &Vec3) -> [Vec3; 2] {
    match dim {
        Dimension::Circle => [[-x[1], x[0], 0.0], [0.0; 3]],
        Dimension::Sphere => {
            let a = if x[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let t1 = normalize(&axpy(&a, -dot(&a, x), x));
            [t1, cross(x, &t1)]
        }
    }
}

fn fibonacci_points(dim: Dimension, count: usize) -> Vec<Vec3> {
    match dim {
        Dimension::Circle => (0..count)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                [t.cos(), t.sin(), 0.0]
            })
            .collect(),
        Dimension::Sphere => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * k as f64;
                    [r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
    }
}

/// Inverse of the reflection map `x ↦ γ(x)` for a reflector whose `γ` is injective.
pub struct Inverter<'a> {
    r: &'a RadialHypersurface,
    table: Vec<(Vec3, Vec3)>,
}

impl<'a> Inverter<'a> {
    pub fn new(r: &'a RadialHypersurface) -> Result<Self> {
        let dim = r.dimension();
        let count = match dim {
            Dimension::Circle => TABLE_CIRCLE,
            Dimension::Sphere => TABLE_SPHERE,
        };
        let table: Vec<(Vec3, Vec3)> = fibonacci_points(dim, count)
            .into_par_iter()
            .filter_map(|x| r.at_ambient(&x).ok().map(|p| (x, p.gamma)))
            .collect();
        if table.is_empty() {
            return Err(Error::InvalidShape("reflector has no points to invert from".into()));
        }
        Ok(Inverter { r, table })
    }

    /// Table point whose reflected direction is closest to `y`.
    pub fn initial_guess(&self, y: &Vec3) -> Vec3 {
        self.table
            .iter()
            .max_by(|a, b| dot(&a.1, y).total_cmp(&dot(&b.1, y)))
            .map(|e| e.0)
            .expect("table is non-empty")
    }

    pub fn invert(&self, y: &Vec3) -> Result<KummerPoint> {
        self.invert_from(y, &self.initial_guess(y))
    }

    /// Damped Newton iteration on the tangent components of `γ(x) − y`.
    pub fn invert_from(&self, y: &Vec3, start: &Vec3) -> Result<KummerPoint> {
        let dim = self.r.dimension();
        let n = dim.n();
        let yb = tangent_basis(dim, y);
        let resid = |g: &Vec3| [dot(g, &yb[0]), dot(g, &yb[1])];
        let mut x = normalize(start);
        let mut p = self.r.at_ambient(&x)?;
        let mut err = norm(&sub(&p.gamma, y));
        for _ in 0..NEWTON_ITERS {
            if err < NEWTON_TOL {
                break;
            }
            let tb = tangent_basis(dim, &x);
            let f = resid(&p.gamma);
            let mut jac = [[0.0; 2]; 2];
            for c in 0..n {
                let gp = self.r.at_ambient(&normalize(&axpy(&x, FD_STEP, &tb[c])))?.gamma;
                let gm = self.r.at_ambient(&normalize(&axpy(&x, -FD_STEP, &tb[c])))?.gamma;
                let (rp, rm) = (resid(&gp), resid(&gm));
                for row in 0..n {
                    jac[row][c] = (rp[row] - rm[row]) / (2.0 * FD_STEP);
                }
            }
            let step = if n == 1 {
                [-f[0] / jac[0][0], 0.0]
            } else {
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                [
                    -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
                    -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
                ]
            };
            if !(step[0].is_finite() && step[1].is_finite()) {
                break;
            }
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-6 {
                let trial = normalize(&axpy(&axpy(&x, lambda * step[0], &tb[0]), lambda * step[1], &tb[1]));
                if let Ok(q) = self.r.at_ambient(&trial) {
                    let e = norm(&sub(&q.gamma, y));
                    if e < err {
                        x = trial;
                        p = q;
                        err = e;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if err < ACCEPT_TOL {
            Ok(p)
        } else {
            Err(Error::Inversion(*y))
        }
    }
}

/// Uniform bin probabilities `area / |S^n|`.
pub fn uniform_probabilities(bins: &EqualAreaBins) -> Vec<f64> {
    vec![1.0 / bins.len() as f64; bins.len()]
}

/// Probability that a ray emitted with density `∝ g` lands in each bin,
/// using an `order`-point Gauss rule per bin coordinate.
pub fn pushforward_probabilities(
    r: &RadialHypersurface,
    density: &SourceDensity,
    bins: &EqualAreaBins,
    order: usize,
) -> Result<Vec<f64>> {
    let dim = r.dimension();
    if bins.dimension != dim || bins.is_empty() {
        return Err(Error::Binning(format!("{bins:?} does not fit a reflector on S^{}", dim.n())));
    }
    let grid = r.grid();
    let gvals: Vec<f64> = (0..grid.len()).map(|k| density.value(&grid.ambient(k), dim)).collect();
    let mass = grid.quadrature(&gvals);
    if !(mass > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let inverter = Inverter::new(r)?;
    let (nodes, weights) = gauss_legendre(order.max(1));
    (0..bins.len())
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let (band, sector) = bins.band_sector(k);
            let (p0, p1) = bins.phi_range(sector);
            let (z0, z1) = match dim {
                Dimension::Circle => (0.0, 0.0),
                Dimension::Sphere => bins.z_range(band),
            };
            let zs: Vec<(f64, f64)> = match dim {
                Dimension::Circle => vec![(0.0, 1.0)],
                Dimension::Sphere => nodes
                    .iter()
                    .zip(&weights)
                    .map(|(t, w)| (0.5 * (z0 + z1) + 0.5 * (z1 - z0) * t, 0.5 * (z1 - z0) * w))
                    .collect(),
            };
            let mut sum = 0.0;
            let mut guess: Option<Vec3> = None;
            for &(z, wz) in &zs {
                for (t, w) in nodes.iter().zip(&weights) {
                    let phi = 0.5 * (p0 + p1) + 0.5 * (p1 - p0) * t;
                    let wp = 0.5 * (p1 - p0) * w;
                    let y = match dim {
                        Dimension::Circle => [phi.cos(), phi.sin(), 0.0],
                        Dimension::Sphere => {
                            let s = (1.0 - z * z).sqrt();
                            [s * phi.cos(), s * phi.sin(), z]
                        }
                    };
                    let p = match guess.as_ref().map(|g| inverter.invert_from(&y, g)) {
                        Some(Ok(p)) => p,
                        _ => inverter.invert(&y)?,
                    };
                    let x = p.metric.point.ambient();
                    guess = Some(x);
                    sum += wz * wp * density.value(&x, dim) / (mass * p.sn_det().abs());
                }
            }
            Ok(sum)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::ConicOfRevolution;
    use crate::sphere::SphereGrid;
    use std::sync::Arc;

    #[test]
    fn inverts_an_ellipse() {
        let grid = Arc::new(SphereGrid::sphere(16).unwrap());
        let conic = ConicOfRevolution::new(Dimension::Sphere, 1.0, 0.4, [0.0, 0.0, 1.0]).unwrap();
        let r = RadialHypersurface::from_function(&grid, Arc::new(conic)).unwrap();
        let inv = Inverter::new(&r).unwrap();
        for x in fibonacci_points(Dimension::Sphere, 37) {
            let y = r.at_ambient(&x).unwrap().gamma;
            let p = inv.invert(&y).unwrap();
            assert!(norm(&sub(&p.metric.point.ambient(), &x)) < 1e-8);
        }
    }

    #[test]
    fn sphere_pushforward_is_uniform() {
        let grid = Arc::new(SphereGrid::sphere(8).unwrap());
        let conic = ConicOfRevolution::sphere(Dimension::Sphere, 1.0).unwrap();
        let r = RadialHypersurface::from_function(&grid, Arc::new(conic)).unwrap();
        let bins = EqualAreaBins::sphere(4, 6).unwrap();
        let p = pushforward_probabilities(&r, &SourceDensity::Uniform, &bins, 3).unwrap();
        for (a, b) in p.iter().zip(uniform_probabilities(&bins)) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
