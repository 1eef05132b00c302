use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{PointMetric, Resolution, SphereGrid};
use super::spectral::{sh_index, Spectrum};
use super::tensor::ChartVec;
use crate::{Error, Result};

/// Point values of a function on a [`SphereGrid`], with lazily computed
/// spectral coefficients.
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("resolution", &self.grid.resolution())
            .field("len", &self.values.len())
            .finish()
    }
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { grid, values, spectrum: OnceLock::new() })
    }

    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(&PointMetric) -> f64) -> Self {
        let values = grid.metric().points().iter().map(f).collect();
        ScalarField { grid: grid.clone(), values, spectrum: OnceLock::new() }
    }

    pub fn constant(grid: &Arc<SphereGrid>, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Synthesize a band-limited field from its coefficients.
    pub fn from_spectrum(grid: &Arc<SphereGrid>, spectrum: Spectrum) -> Self {
        let spectrum = Self::fit_spectrum(grid, spectrum);
        let values = grid.transform().synthesize(&spectrum, [0, 0]);
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        ScalarField { grid: grid.clone(), values, spectrum: cell }
    }

    /// `1 + amplitude · f / sup|f|` for a random `f` of degree `1..=degree`,
    /// coefficients uniform in `[−½, ½]`. Positive whenever `amplitude < 1`.
    pub fn random_positive(grid: &Arc<SphereGrid>, seed: u64, degree: usize, amplitude: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |skip: bool| if skip { 0.0 } else { rng.random::<f64>() - 0.5 };
        let spectrum = match grid.dimension() {
            super::Dimension::Circle => {
                let a = (0..=degree).map(|k| draw(k == 0)).collect();
                let b = (0..=degree).map(|k| draw(k == 0)).collect();
                Spectrum::Circle { a, b }
            }
            super::Dimension::Sphere => {
                let mut c = vec![0.0; (degree + 1) * (degree + 1)];
                for l in 1..=degree {
                    for m in -(l as i64)..=(l as i64) {
                        c[sh_index(l, m)] = draw(false);
                    }
                }
                Spectrum::Sphere(c)
            }
        };
        let f = Self::from_spectrum(grid, spectrum);
        let s = f.sup_norm();
        if s == 0.0 {
            return Self::constant(grid, 1.0);
        }
        f.map(|v| 1.0 + amplitude * v / s)
    }

    fn fit_spectrum(grid: &SphereGrid, spectrum: Spectrum) -> Spectrum {
        // pad or truncate to the grid's degree
        let l = grid.degree();
        match spectrum {
            Spectrum::Circle { mut a, mut b } => {
                a.resize(l + 1, 0.0);
                b.resize(l + 1, 0.0);
                b[l] = 0.0;
                Spectrum::Circle { a, b }
            }
            Spectrum::Sphere(mut c) => {
                c.resize((l + 1) * (l + 1), 0.0);
                Spectrum::Sphere(c)
            }
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Spectral coefficients, computed on first use.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| self.grid.transform().analyze(&self.values))
    }

    /// Re-synthesized point values of the spectral projection.
    pub fn projected(&self) -> ScalarField {
        Self::from_spectrum(&self.grid, self.spectrum().clone())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        Ok(ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            spectrum: OnceLock::new(),
        })
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature mean `∫ f dσ / |S^n|`.
    pub fn mean(&self) -> f64 {
        self.grid.quadrature(&self.values) / self.grid.dimension().volume()
    }

    pub fn to_document(&self) -> ScalarFieldDocument {
        ScalarFieldDocument {
            dimension: self.grid.dimension().n(),
            grid: self.grid.resolution(),
            values: self.values.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_document())?)
    }

    /// Parse a field, building a fresh grid from the stored sizes.
    pub fn from_json(s: &str) -> Result<ScalarField> {
        let doc: ScalarFieldDocument = serde_json::from_str(s)?;
        doc.into_field(None)
    }
}

/// On-disk form of a [`ScalarField`]: grid sizes plus row-major point values
/// (colatitude-major on S^2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarFieldDocument {
    pub dimension: usize,
    pub grid: Resolution,
    pub values: Vec<f64>,
}

impl ScalarFieldDocument {
    /// Convert to a field, reusing `grid` when it matches the stored sizes.
    pub fn into_field(self, grid: Option<&Arc<SphereGrid>>) -> Result<ScalarField> {
        if self.grid.dimension().n() != self.dimension {
            return Err(Error::Resolution(format!(
                "dimension {} does not match grid {:?}",
                self.dimension, self.grid
            )));
        }
        let grid = match grid {
            Some(g) if g.resolution() == self.grid => g.clone(),
            _ => Arc::new(SphereGrid::new(self.grid)?),
        };
        ScalarField::new(grid, self.values)
    }
}

/// Chart components `∇_i f` of a gradient at every grid point.
#[derive(Clone, Debug)]
pub struct CovectorField {
    pub grid: Arc<SphereGrid>,
    pub values: Vec<ChartVec>,
}

impl CovectorField {
    /// `|∇f|^2 = e^{ij} f_i f_j` at every point.
    pub fn norm2(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(self.grid.metric().points())
            .map(|(v, m)| m.norm2_covector(*v))
            .collect()
    }
}
