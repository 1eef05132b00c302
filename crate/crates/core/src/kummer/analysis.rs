//! Grid-wide evaluation of the pointwise geometry in [`KummerPoint`].

use std::sync::Arc;

use rayon::prelude::*;

use crate::sphere::{ScalarField, SymMat, SymTensorField2, Vec3};
use crate::Result;

use super::{KummerPoint, RadialHypersurface};

/// Positions, `W_ρ` and unit normals.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub positions: Vec<Vec3>,
    pub w: Vec<f64>,
    pub normals: Vec<Vec3>,
}

#[derive(Clone, Debug)]
pub struct FundamentalForms {
    pub g: SymTensorField2,
    pub g_inverse: Vec<SymMat>,
    pub b: SymTensorField2,
    pub normals: Vec<Vec3>,
    /// `det g` computed from the components.
    pub det_g: Vec<f64>,
    /// `ρ^{2n−2} W² det e`
    pub det_formula: Vec<f64>,
}

impl FundamentalForms {
    /// `max |det g − ρ^{2n−2} W² det e| / max(1, |det g|)`
    pub fn det_defect(&self) -> f64 {
        self.det_g
            .iter()
            .zip(&self.det_formula)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ReflectionField {
    pub gamma: Vec<Vec3>,
}

#[derive(Clone, Debug)]
pub struct IntensityForm {
    pub kappa: SymTensorField2,
}

impl IntensityForm {
    pub fn frame(&self) -> Vec<SymMat> {
        self.kappa.frame()
    }
}

/// Principal intensities and their symmetric functions at every sampled point.
#[derive(Clone, Debug)]
pub struct IntensitySpectrum {
    /// Ascending principal intensities per point.
    pub lambdas: Vec<Vec<f64>>,
    /// `S_1..S_n` per point.
    pub s: Vec<Vec<f64>>,
    /// `a^i_j = e^{is} κ_sj` per point.
    pub mixed: Vec<[[f64; 2]; 2]>,
    /// `det κ / det e` per point.
    pub sn_det: Vec<f64>,
}

impl IntensitySpectrum {
    /// `S_m` at every point, `1 <= m <= n`.
    pub fn s_m(&self, m: usize) -> Vec<f64> {
        self.s.iter().map(|s| s[m - 1]).collect()
    }

    /// `max |S_n − det κ / det e|`
    pub fn sn_defect(&self) -> f64 {
        self.s
            .iter()
            .zip(&self.sn_det)
            .map(|(s, d)| (s[s.len() - 1] - d).abs())
            .fold(0.0, f64::max)
    }
}

/// `S_1` by the trace formula and by the operator `M[ρ]`.
#[derive(Clone, Debug)]
pub struct MeanIntensity {
    grid: Arc<crate::sphere::SphereGrid>,
    support: Option<Arc<[usize]>>,
    pub trace: Vec<f64>,
    pub operator: Vec<f64>,
}

impl MeanIntensity {
    pub fn max_disagreement(&self) -> f64 {
        self.trace.iter().zip(&self.operator).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.trace.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.trace.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The trace-formula `S_1` as a field; fails for partial reflectors.
    pub fn to_field(&self) -> Result<ScalarField> {
        if self.support.is_some() {
            return Err(crate::Error::OutsideDomain("reflector does not cover the whole grid".into()));
        }
        ScalarField::new(self.grid.clone(), self.trace.clone())
    }
}

fn tensor(r: &RadialHypersurface, values: Vec<SymMat>) -> SymTensorField2 {
    SymTensorField2::on_support(r.grid().clone(), r.support().cloned(), values)
}

fn map_points<T: Send>(r: &RadialHypersurface, f: impl Fn(&KummerPoint) -> T + Sync) -> Vec<T> {
    (0..r.len()).into_par_iter().map(|k| f(&r.point(k))).collect()
}

pub fn embed(r: &RadialHypersurface) -> Embedding {
    let pts = r.points();
    Embedding {
        positions: pts.iter().map(|p| p.position()).collect(),
        w: pts.iter().map(|p| p.w).collect(),
        normals: pts.iter().map(|p| p.normal).collect(),
    }
}

pub fn fundamental_forms(r: &RadialHypersurface) -> FundamentalForms {
    let pts = r.points();
    let g: Vec<SymMat> = pts.iter().map(|p| p.first_form()).collect();
    FundamentalForms {
        det_g: g.iter().map(|g| g.det()).collect(),
        g: tensor(r, g),
        g_inverse: pts.iter().map(|p| p.first_form_inverse()).collect(),
        b: tensor(r, pts.iter().map(|p| p.second_form()).collect()),
        normals: pts.iter().map(|p| p.normal).collect(),
        det_formula: pts.iter().map(|p| p.first_form_det_formula()).collect(),
    }
}

pub fn reflection_map(r: &RadialHypersurface) -> ReflectionField {
    ReflectionField { gamma: map_points(r, |p| p.gamma) }
}

/// κ from `−ρ∇²ρ + 2∇ρ⊗∇ρ + ((ρ² − |∇ρ|²)/2) e`, divided by `W²/2`.
pub fn intensity_form(r: &RadialHypersurface) -> IntensityForm {
    IntensityForm { kappa: tensor(r, map_points(r, |p| p.kappa)) }
}

/// κ from `−κ = e + (2/W) b`.
pub fn intensity_form_via_second_form(r: &RadialHypersurface) -> IntensityForm {
    IntensityForm { kappa: tensor(r, map_points(r, |p| p.kappa_via_second_form())) }
}

pub fn ehat_form(r: &RadialHypersurface) -> SymTensorField2 {
    tensor(r, map_points(r, |p| p.ehat()))
}

pub fn principal_intensities(r: &RadialHypersurface) -> IntensitySpectrum {
    let rows = map_points(r, |p| (p.principal_intensities(), p.mixed(), p.sn_det()));
    let mut out = IntensitySpectrum { lambdas: vec![], s: vec![], mixed: vec![], sn_det: vec![] };
    for (l, a, d) in rows {
        out.s.push(super::elementary_symmetric(&l));
        out.lambdas.push(l);
        out.mixed.push(a);
        out.sn_det.push(d);
    }
    out
}

pub fn mean_intensity(r: &RadialHypersurface) -> MeanIntensity {
    let rows = map_points(r, |p| (p.s1_trace(), p.mean_operator()));
    MeanIntensity {
        grid: r.grid().clone(),
        support: r.support().cloned(),
        trace: rows.iter().map(|r| r.0).collect(),
        operator: rows.iter().map(|r| r.1).collect(),
    }
}
