//! Monte Carlo ray tracing through a reflector: sampled source directions,
//! far-field histograms, and focal checks.

mod binning;
mod pushforward;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::kummer::RadialHypersurface;
use crate::shapes::ConicOfRevolution;
use crate::sphere::{Dimension, ScalarField, Vec3};
use crate::{Error, Result};

pub use binning::{
    compare_bins, farfield_density, histogram_csv, BinComparison, EqualAreaBins, FarFieldHistogram,
    DEFAULT_SPHERE_BANDS, DEFAULT_SPHERE_SECTORS,
};
pub use pushforward::{pushforward_probabilities, uniform_probabilities, Inverter};

/// Generator for ray `index` of a batch: ChaCha8 keyed by the seed, one stream per ray.
pub fn ray_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A uniformly distributed unit vector on S^n.
pub fn uniform_direction<R: Rng>(dim: Dimension, rng: &mut R) -> Vec3 {
    match dim {
        Dimension::Circle => {
            let t = 2.0 * PI * rng.random::<f64>();
            [t.cos(), t.sin(), 0.0]
        }
        Dimension::Sphere => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let phi = 2.0 * PI * rng.random::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            [r * phi.cos(), r * phi.sin(), z]
        }
    }
}

type DensityFn = dyn Fn(&Vec3) -> f64 + Send + Sync;

/// Source intensity `g` on S^n, up to normalization.
#[derive(Clone)]
pub enum SourceDensity {
    Uniform,
    /// Spectrally interpolated point values.
    Field(ScalarField),
    /// A callable with a known upper bound, used for rejection sampling.
    Function { f: Arc<DensityFn>, bound: f64 },
}

impl fmt::Debug for SourceDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceDensity::Uniform => write!(f, "Uniform"),
            SourceDensity::Field(field) => write!(f, "Field({field:?})"),
            SourceDensity::Function { bound, .. } => write!(f, "Function(bound={bound})"),
        }
    }
}

const MAX_REJECTIONS: usize = 1_000_000;

impl SourceDensity {
    pub fn function(f: impl Fn(&Vec3) -> f64 + Send + Sync + 'static, bound: f64) -> Self {
        SourceDensity::Function { f: Arc::new(f), bound }
    }

    pub fn value(&self, x: &Vec3, dim: Dimension) -> f64 {
        match self {
            SourceDensity::Uniform => 1.0,
            SourceDensity::Field(field) => {
                let p = crate::sphere::ChartPoint::from_ambient(dim, x);
                field.spectrum().eval_point(&p).value
            }
            SourceDensity::Function { f, .. } => f(x),
        }
    }

    fn bound(&self) -> Result<Option<f64>> {
        match self {
            SourceDensity::Uniform => Ok(None),
            SourceDensity::Field(field) => {
                let max = field.max();
                if !(max > 0.0) {
                    return Err(Error::ZeroDensity);
                }
                Ok(Some(1.25 * max))
            }
            SourceDensity::Function { bound, .. } => {
                if !(*bound > 0.0) {
                    return Err(Error::ZeroDensity);
                }
                Ok(Some(*bound))
            }
        }
    }

    /// Rejection sampling of a direction with density proportional to `g dσ`.
    fn sample<R: Rng>(&self, dim: Dimension, bound: Option<f64>, rng: &mut R) -> Result<Vec3> {
        let Some(bound) = bound else {
            return Ok(uniform_direction(dim, rng));
        };
        for _ in 0..MAX_REJECTIONS {
            let x = uniform_direction(dim, rng);
            let g = self.value(&x, dim);
            if g > bound {
                return Err(Error::DensityBound { value: g, bound });
            }
            if rng.random::<f64>() * bound < g {
                return Ok(x);
            }
        }
        Err(Error::ZeroDensity)
    }
}

/// One traced ray: source direction, reflection point and reflected direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub source: Vec3,
    pub point: Vec3,
    pub direction: Vec3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayBatch {
    pub seed: u64,
    pub dimension: Dimension,
    pub rays: Vec<Ray>,
}

impl RayBatch {
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }
}

/// Sample `count` source directions with density `∝ g dσ` and reflect them off `r`.
/// The batch depends only on `(r, g, count, seed)`, not on the thread schedule.
pub fn trace_batch(r: &RadialHypersurface, density: &SourceDensity, count: usize, seed: u64) -> Result<RayBatch> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    let dim = r.dimension();
    let bound = density.bound()?;
    let rays = (0..count)
        .into_par_iter()
        .map(|i| -> Result<Ray> {
            let mut rng = ray_rng(seed, i as u64);
            let x = density.sample(dim, bound, &mut rng)?;
            let p = r.at_ambient(&x)?;
            Ok(Ray { source: x, point: p.position(), direction: p.gamma })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RayBatch { seed, dimension: dim, rays })
}

/// Largest distance from the full reflected lines `{r + sγ : s ∈ ℝ}` to the second focus.
pub fn focal_concentration(shape: &ConicOfRevolution, batch: &RayBatch) -> Result<f64> {
    let a = shape.second_focus()?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(batch.rays.par_iter().map(|ray| line_distance(ray, &a)).reduce(|| 0.0, f64::max))
}

pub fn line_distance(ray: &Ray, a: &Vec3) -> f64 {
    let d = crate::sphere::sub(a, &ray.point);
    let along = crate::sphere::dot(&d, &ray.direction);
    crate::sphere::norm(&crate::sphere::axpy(&d, -along, &ray.direction))
}

/// `sup | sqrt(det ê / det e) − |S_n| | / (1 + |S_n|)` over the sampled points.
pub fn jacobian_consistency(r: &RadialHypersurface) -> f64 {
    (0..r.len())
        .into_par_iter()
        .map(|k| {
            let p = r.point(k);
            let sn = p.sn_det().abs();
            (p.jacobian() - sn).abs() / (1.0 + sn)
        })
        .reduce(|| 0.0, f64::max)
}
