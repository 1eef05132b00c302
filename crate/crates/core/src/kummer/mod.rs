//! Radial reflectors `r = ρx` and their reflected-ray geometry.

mod analysis;
mod conformal;
mod export;
mod fd_check;
mod point;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::sphere::{
    chart_derivatives, covariant_hessian_from, ChartPoint, ChartVec, DerivativeMethod, Dimension, PointMetric,
    ScalarField, SphereGrid, SymMat,
};
use crate::{Error, Result};

pub use analysis::{
    ehat_form, embed, fundamental_forms, intensity_form, intensity_form_via_second_form, mean_intensity,
    principal_intensities, reflection_map, Embedding, FundamentalForms, IntensityForm, IntensitySpectrum,
    MeanIntensity, ReflectionField,
};
pub use conformal::{conformal_intensity_form, conformal_kappa, ConformalIntensity};
pub(crate) use export::csv_err;
pub use export::{spectrum_csv, tensor_json, TensorExport, TensorExportPoint};
pub use fd_check::{finite_difference_defects, normal_component_check, FdDefects};
pub use point::{elementary_symmetric, DirectionalIntensity, KummerPoint, StrictionResult, STRICTION_TOLERANCE};

/// `ρ`, its chart gradient `ρ_i` and covariant Hessian `∇_ij ρ` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialJet {
    pub rho: f64,
    pub d: ChartVec,
    pub hess: SymMat,
}

impl RadialJet {
    pub fn scaled(&self, lambda: f64) -> RadialJet {
        RadialJet {
            rho: lambda * self.rho,
            d: [lambda * self.d[0], lambda * self.d[1]],
            hess: self.hess.scale(lambda),
        }
    }

    /// Jet of `1/v` from the jet of `v`.
    pub fn reciprocal(&self) -> RadialJet {
        let v = self.rho;
        let inv = 1.0 / v;
        let inv2 = inv * inv;
        let d = [-self.d[0] * inv2, -self.d[1] * inv2];
        let outer = SymMat::outer(self.hess.dim, self.d);
        RadialJet { rho: inv, d, hess: self.hess.scale(-inv2).axpy(2.0 * inv2 * inv, &outer) }
    }

    /// Jet of `exp(−w)` from the jet of `w`.
    pub fn exp_neg(&self) -> RadialJet {
        let rho = (-self.rho).exp();
        let d = [-rho * self.d[0], -rho * self.d[1]];
        let outer = SymMat::outer(self.hess.dim, self.d);
        RadialJet { rho, d, hess: outer.sub(&self.hess).scale(rho) }
    }

    /// Jet of `−ln ρ` from the jet of `ρ`.
    pub fn neg_log(&self) -> RadialJet {
        let inv = 1.0 / self.rho;
        let d = [-self.d[0] * inv, -self.d[1] * inv];
        let hess = self.hess.scale(-inv).add(&SymMat::outer(self.hess.dim, d));
        RadialJet { rho: -self.rho.ln(), d, hess }
    }
}

/// A radial function with exact derivatives, evaluable anywhere in its domain.
pub trait RadialFunction: Send + Sync {
    fn dimension(&self) -> Dimension;

    fn jet(&self, m: &PointMetric) -> Result<RadialJet>;

    /// Whether the domain is all of S^n.
    fn closed(&self) -> bool {
        true
    }
}

/// Jet of a function `F(⟨x,u⟩)` given `F, F', F''` at `s = ⟨x,u⟩`.
pub fn axial_jet(m: &PointMetric, axis: &[f64; 3], f: [f64; 3]) -> RadialJet {
    let s = crate::sphere::dot(&m.x, axis);
    let n = m.dim().n();
    let mut ds = [0.0; 2];
    for (i, v) in ds.iter_mut().enumerate().take(n) {
        *v = crate::sphere::dot(&m.tangents[i], axis);
    }
    // ∇_ij s = −s e_ij for a first harmonic
    let hess = SymMat::outer(m.dim(), ds).scale(f[2]).axpy(-f[1] * s, &m.metric);
    RadialJet { rho: f[0], d: [f[1] * ds[0], f[1] * ds[1]], hess }
}

/// Spectral evaluation of a scalar field, used off the grid.
struct SpectralRadial {
    field: ScalarField,
}

impl RadialFunction for SpectralRadial {
    fn dimension(&self) -> Dimension {
        self.field.grid().dimension()
    }

    fn jet(&self, m: &PointMetric) -> Result<RadialJet> {
        let j = self.field.spectrum().eval_point(&m.point);
        Ok(RadialJet { rho: j.value, d: j.d, hess: m.covariant_hessian(j.d, &j.d2) })
    }
}

/// Off-grid evaluation of `ρ = T(f)` where `T` maps jets of a spectral field.
struct MappedRadial {
    inner: SpectralRadial,
    map: fn(&RadialJet) -> RadialJet,
}

impl RadialFunction for MappedRadial {
    fn dimension(&self) -> Dimension {
        self.inner.dimension()
    }

    fn jet(&self, m: &PointMetric) -> Result<RadialJet> {
        Ok((self.map)(&self.inner.jet(m)?))
    }
}

struct ScaledRadial {
    inner: Arc<dyn RadialFunction>,
    lambda: f64,
}

impl RadialFunction for ScaledRadial {
    fn dimension(&self) -> Dimension {
        self.inner.dimension()
    }

    fn jet(&self, m: &PointMetric) -> Result<RadialJet> {
        Ok(self.inner.jet(m)?.scaled(self.lambda))
    }

    fn closed(&self) -> bool {
        self.inner.closed()
    }
}

/// A reflector `r(x) = ρ(x)x` sampled at the points of a grid.
///
/// Derivatives at grid points come either from an analytic [`RadialFunction`]
/// or from a [`ScalarField`] (spectral or finite-difference path). Off-grid
/// evaluation always uses the analytic function or the spectral series.
#[derive(Clone)]
pub struct RadialHypersurface {
    grid: Arc<SphereGrid>,
    support: Option<Arc<[usize]>>,
    jets: Vec<RadialJet>,
    eval: Arc<dyn RadialFunction>,
    closed: bool,
}

impl fmt::Debug for RadialHypersurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialHypersurface")
            .field("resolution", &self.grid.resolution())
            .field("points", &self.jets.len())
            .field("closed", &self.closed)
            .finish()
    }
}

fn check_positive(jets: &[RadialJet], support: Option<&Arc<[usize]>>) -> Result<()> {
    for (k, j) in jets.iter().enumerate() {
        if !(j.rho > 0.0) {
            let index = support.map_or(k, |s| s[k]);
            return Err(Error::NonPositiveRadius { index, value: j.rho });
        }
    }
    Ok(())
}

impl RadialHypersurface {
    /// Reflector from point values of ρ, differentiated spectrally.
    pub fn from_field(rho: &ScalarField) -> Result<Self> {
        Self::from_field_with(rho, DerivativeMethod::Spectral)
    }

    pub fn from_field_with(rho: &ScalarField, method: DerivativeMethod) -> Result<Self> {
        let jets = field_jets(rho, method);
        check_positive(&jets, None)?;
        Ok(RadialHypersurface {
            grid: rho.grid().clone(),
            support: None,
            jets,
            eval: Arc::new(SpectralRadial { field: rho.clone() }),
            closed: true,
        })
    }

    /// Reflector `ρ = 1/v`, with derivatives by the chain rule from those of `v`.
    pub fn reciprocal(v: &ScalarField) -> Result<Self> {
        Self::mapped(v, RadialJet::reciprocal, true)
    }

    /// Reflector `ρ = exp(−w)`, with derivatives by the chain rule.
    pub fn exp_neg(w: &ScalarField) -> Result<Self> {
        Self::mapped(w, RadialJet::exp_neg, false)
    }

    fn mapped(f: &ScalarField, map: fn(&RadialJet) -> RadialJet, positive_input: bool) -> Result<Self> {
        if positive_input {
            if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(Error::NonPositiveIterate { index, value });
            }
        }
        let jets: Vec<RadialJet> = field_jets(f, DerivativeMethod::Spectral).iter().map(map).collect();
        check_positive(&jets, None)?;
        Ok(RadialHypersurface {
            grid: f.grid().clone(),
            support: None,
            jets,
            eval: Arc::new(MappedRadial { inner: SpectralRadial { field: f.clone() }, map }),
            closed: true,
        })
    }

    /// Reflector from an analytic radial function; every grid point must lie in its domain.
    pub fn from_function(grid: &Arc<SphereGrid>, f: Arc<dyn RadialFunction>) -> Result<Self> {
        if f.dimension() != grid.dimension() {
            return Err(Error::GridMismatch);
        }
        let jets = grid.metric().points().par_iter().map(|m| f.jet(m)).collect::<Result<Vec<_>>>()?;
        check_positive(&jets, None)?;
        let closed = f.closed();
        Ok(RadialHypersurface { grid: grid.clone(), support: None, jets, eval: f, closed })
    }

    /// Reflector from an analytic radial function, restricted to the grid points in its domain.
    pub fn on_domain(grid: &Arc<SphereGrid>, f: Arc<dyn RadialFunction>) -> Result<Self> {
        if f.dimension() != grid.dimension() {
            return Err(Error::GridMismatch);
        }
        let evaluated: Vec<(usize, Result<RadialJet>)> =
            grid.metric().points().par_iter().enumerate().map(|(k, m)| (k, f.jet(m))).collect();
        let mut support = Vec::new();
        let mut jets = Vec::new();
        for (k, r) in evaluated {
            match r {
                Ok(j) => {
                    support.push(k);
                    jets.push(j);
                }
                Err(Error::OutsideDomain(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if jets.is_empty() {
            return Err(Error::OutsideDomain("no grid point lies in the domain".into()));
        }
        let support: Option<Arc<[usize]>> = if support.len() == grid.len() { None } else { Some(support.into()) };
        check_positive(&jets, support.as_ref())?;
        let closed = f.closed() && support.is_none();
        Ok(RadialHypersurface { grid: grid.clone(), support, jets, eval: f, closed })
    }

    /// The homothetic reflector `λρ`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidShape(format!("scale factor must be positive, got {lambda}")));
        }
        Ok(RadialHypersurface {
            grid: self.grid.clone(),
            support: self.support.clone(),
            jets: self.jets.iter().map(|j| j.scaled(lambda)).collect(),
            eval: Arc::new(ScaledRadial { inner: self.eval.clone(), lambda }),
            closed: self.closed,
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn dimension(&self) -> Dimension {
        self.grid.dimension()
    }

    /// Grid indices of the sampled points, or `None` when every grid point is sampled.
    pub fn support(&self) -> Option<&Arc<[usize]>> {
        self.support.as_ref()
    }

    pub fn grid_index(&self, k: usize) -> usize {
        self.support.as_ref().map_or(k, |s| s[k])
    }

    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }

    /// Whether ρ is sampled over the whole sphere (a closed reflector).
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn jets(&self) -> &[RadialJet] {
        &self.jets
    }

    pub fn rho_values(&self) -> Vec<f64> {
        self.jets.iter().map(|j| j.rho).collect()
    }

    /// ρ as a scalar field; fails for reflectors sampled on part of the grid.
    pub fn rho_field(&self) -> Result<ScalarField> {
        if self.support.is_some() {
            return Err(Error::OutsideDomain("reflector does not cover the whole grid".into()));
        }
        ScalarField::new(self.grid.clone(), self.rho_values())
    }

    /// Pointwise geometry at the `k`-th sampled point.
    pub fn point(&self, k: usize) -> KummerPoint {
        KummerPoint::new(*self.grid.metric().at(self.grid_index(k)), self.jets[k])
    }

    pub fn points(&self) -> Vec<KummerPoint> {
        (0..self.len()).into_par_iter().map(|k| self.point(k)).collect()
    }

    /// Pointwise geometry at an arbitrary chart point.
    pub fn at(&self, p: &ChartPoint) -> Result<KummerPoint> {
        let m = p.metric();
        let jet = self.eval.jet(&m)?;
        if !(jet.rho > 0.0) {
            return Err(Error::NonPositiveRadius { index: usize::MAX, value: jet.rho });
        }
        Ok(KummerPoint::new(m, jet))
    }

    /// Pointwise geometry at the unit vector `x`.
    pub fn at_ambient(&self, x: &[f64; 3]) -> Result<KummerPoint> {
        self.at(&ChartPoint::from_ambient(self.dimension(), x))
    }

    pub fn function(&self) -> &Arc<dyn RadialFunction> {
        &self.eval
    }
}

fn field_jets(f: &ScalarField, method: DerivativeMethod) -> Vec<RadialJet> {
    let cd = chart_derivatives(f, method);
    let hess = covariant_hessian_from(f.grid(), &cd);
    f.values()
        .iter()
        .zip(&cd.d)
        .zip(hess.values())
        .map(|((&rho, &d), &hess)| RadialJet { rho, d, hess })
        .collect()
}
