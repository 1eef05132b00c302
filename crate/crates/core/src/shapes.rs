//! Closed-form reflectors: conics of revolution with a focus at the origin,
//! plane pieces, and simple axial test functions.

use serde::{Deserialize, Serialize};

use crate::kummer::{axial_jet, RadialFunction, RadialJet};
use crate::sphere::{dot, norm, normalize, scale, sub, Dimension, PointMetric, SymMat, Vec3};
use crate::{Error, Result};

/// Evaluations closer than this to the boundary of a shape's domain are rejected.
pub const DOMAIN_MARGIN: f64 = 1e-8;

fn unit_axis(dim: Dimension, axis: Vec3) -> Result<Vec3> {
    let mut a = axis;
    if dim == Dimension::Circle {
        a[2] = 0.0;
    }
    let n = norm(&a);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidShape(format!("axis {axis:?} has no direction in S^{}", dim.n())));
    }
    Ok(normalize(&a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConicKind {
    Sphere,
    Ellipsoid,
    Paraboloid,
    Hyperboloid,
}

/// `ρ(x) = p / (1 − ecc ⟨x,u⟩)`: a conic of revolution with one focus at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConicOfRevolution {
    dim: Dimension,
    p: f64,
    ecc: f64,
    axis: Vec3,
}

impl ConicOfRevolution {
    pub fn new(dim: Dimension, p: f64, ecc: f64, axis: Vec3) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidShape(format!("semi-latus rectum must be positive, got {p}")));
        }
        if !(ecc >= 0.0) || !ecc.is_finite() {
            return Err(Error::InvalidShape(format!("eccentricity must be nonnegative, got {ecc}")));
        }
        Ok(ConicOfRevolution { dim, p, ecc, axis: unit_axis(dim, axis)? })
    }

    pub fn sphere(dim: Dimension, radius: f64) -> Result<Self> {
        let axis = if dim == Dimension::Circle { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
        Self::new(dim, radius, 0.0, axis)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn ecc(&self) -> f64 {
        self.ecc
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn kind(&self) -> ConicKind {
        if self.ecc == 0.0 {
            ConicKind::Sphere
        } else if self.ecc < 1.0 {
            ConicKind::Ellipsoid
        } else if self.ecc == 1.0 {
            ConicKind::Paraboloid
        } else {
            ConicKind::Hyperboloid
        }
    }

    /// Distance of `⟨x,u⟩` to the edge of the domain (infinite for closed conics).
    fn boundary_gap(&self, s: f64) -> f64 {
        if self.ecc < 1.0 {
            f64::INFINITY
        } else {
            1.0 / self.ecc - s
        }
    }

    pub fn in_domain(&self, x: &Vec3) -> bool {
        self.boundary_gap(dot(x, &self.axis)) > DOMAIN_MARGIN
    }

    pub fn rho(&self, x: &Vec3) -> Result<f64> {
        let s = dot(x, &self.axis);
        if self.boundary_gap(s) <= DOMAIN_MARGIN {
            return Err(Error::OutsideDomain(format!("⟨x,u⟩ = {s} for eccentricity {}", self.ecc)));
        }
        Ok(self.p / (1.0 - self.ecc * s))
    }

    /// `a = (2 p ecc / (1 − ecc²)) u`; undefined for the paraboloid.
    pub fn second_focus(&self) -> Result<Vec3> {
        if self.ecc == 1.0 {
            return Err(Error::InvalidShape("the paraboloid has its second focus at infinity".into()));
        }
        Ok(scale(&self.axis, 2.0 * self.p * self.ecc / (1.0 - self.ecc * self.ecc)))
    }

    /// Closed-form κ at a point: `e` (sphere), `±(ρ/|ρx − a|) e` (ellipsoid, hyperboloid), `0` (paraboloid).
    pub fn expected_intensity_form(&self, m: &PointMetric) -> Result<SymMat> {
        let rho = self.rho(&m.x)?;
        let factor = match self.kind() {
            ConicKind::Sphere => 1.0,
            ConicKind::Paraboloid => 0.0,
            kind => {
                let a = self.second_focus()?;
                let d = norm(&sub(&scale(&m.x, rho), &a));
                let c = rho / d;
                if kind == ConicKind::Ellipsoid {
                    c
                } else {
                    -c
                }
            }
        };
        Ok(m.metric.scale(factor))
    }

    /// Same shape scaled by `λ` about the origin.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.dim, lambda * self.p, self.ecc, self.axis)
    }
}

impl RadialFunction for ConicOfRevolution {
    fn dimension(&self) -> Dimension {
        self.dim
    }

    fn jet(&self, m: &PointMetric) -> Result<RadialJet> {
        let rho = self.rho(&m.x)?;
        let s = dot(&m.x, &self.axis);
        let d = 1.0 - self.ecc * s;
        let f1 = self.p * self.ecc / (d * d);
        let f2 = 2.0 * self.p * self.ecc * self.ecc / (d * d * d);
        Ok(axial_jet(m, &self.axis, [rho, f1, f2]))
    }

    fn closed(&self) -> bool {
        self.ecc < 1.0
    }
}

/// `ρ(x) = c / ⟨x,d⟩` on the open hemisphere `⟨x,d⟩ > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePiece {
    dim: Dimension,
    normal: Vec3,
    offset: f64,
}

impl PlanePiece {
    pub fn new(dim: Dimension, normal: Vec3, offset: f64) -> Result<Self> {
        if !(offset > 0.0) || !offset.is_finite() {
            return Err(Error::InvalidShape(format!("plane offset must be positive, got {offset}")));
        }
        Ok(PlanePiece { dim, normal: unit_axis(dim, normal)?, offset })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn in_domain(&self, x: &Vec3) -> bool {
        dot(x, &self.normal) > DOMAIN_MARGIN
    }

    pub fn expected_intensity_form(&self, m: &PointMetric) -> Result<SymMat> {
        if !self.in_domain(&m.x) {
            return Err(Error::OutsideDomain("point not in the open hemisphere of the plane".into()));
        }
        Ok(m.metric.scale(-1.0))
    }
}

impl RadialFunction for PlanePiece {
    fn dimension(&self) -> Dimension {
        self.dim
    }

    fn jet(&self, m: &PointMetric) -> Result<RadialJet> {
        let s = dot(&m.x, &self.normal);
        if s <= DOMAIN_MARGIN {
            return Err(Error::OutsideDomain(format!("⟨x,d⟩ = {s} is not positive")));
        }
        let c = self.offset;
        Ok(axial_jet(m, &self.normal, [c / s, -c / (s * s), 2.0 * c / (s * s * s)]))
    }

    fn closed(&self) -> bool {
        false
    }
}

/// Profile `F` of an axially symmetric radial function `ρ = F(⟨x,u⟩)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum AxialProfile {
    /// `c0 + c1 s`
    Affine { c0: f64, c1: f64 },
    /// `scale · exp(rate · s)`
    Exp { scale: f64, rate: f64 },
}

/// Smooth closed test reflector `ρ = F(⟨x,u⟩)` with exact derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxialRadial {
    dim: Dimension,
    axis: Vec3,
    profile: AxialProfile,
}

impl AxialRadial {
    pub fn new(dim: Dimension, axis: Vec3, profile: AxialProfile) -> Result<Self> {
        let ok = match profile {
            AxialProfile::Affine { c0, c1 } => c0 > c1.abs(),
            AxialProfile::Exp { scale, rate } => scale > 0.0 && rate.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidShape(format!("{profile:?} is not positive on the sphere")));
        }
        Ok(AxialRadial { dim, axis: unit_axis(dim, axis)?, profile })
    }

    pub fn axis(&self) -> Vec3 {
        self.axis
    }

    pub fn profile(&self) -> AxialProfile {
        self.profile
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.derivatives(dot(x, &self.axis))[0]
    }

    fn derivatives(&self, s: f64) -> [f64; 3] {
        match self.profile {
            AxialProfile::Affine { c0, c1 } => [c0 + c1 * s, c1, 0.0],
            AxialProfile::Exp { scale, rate } => {
                let f = scale * (rate * s).exp();
                [f, rate * f, rate * rate * f]
            }
        }
    }
}

impl RadialFunction for AxialRadial {
    fn dimension(&self) -> Dimension {
        self.dim
    }

    fn jet(&self, m: &PointMetric) -> Result<RadialJet> {
        Ok(axial_jet(m, &self.axis, self.derivatives(dot(&m.x, &self.axis))))
    }
}

/// A shape from the catalog.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Conic(ConicOfRevolution),
    Plane(PlanePiece),
}

impl Shape {
    pub fn dimension(&self) -> Dimension {
        match self {
            Shape::Conic(c) => c.dim,
            Shape::Plane(p) => p.dim,
        }
    }

    pub fn expected_intensity_form(&self, m: &PointMetric) -> Result<SymMat> {
        match self {
            Shape::Conic(c) => c.expected_intensity_form(m),
            Shape::Plane(p) => p.expected_intensity_form(m),
        }
    }

    pub fn function(&self) -> std::sync::Arc<dyn RadialFunction> {
        match *self {
            Shape::Conic(c) => std::sync::Arc::new(c),
            Shape::Plane(p) => std::sync::Arc::new(p),
        }
    }

    pub fn as_conic(&self) -> Option<&ConicOfRevolution> {
        match self {
            Shape::Conic(c) => Some(c),
            Shape::Plane(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere,
    Ellipsoid,
    Paraboloid,
    Hyperboloid,
    Conic,
    Plane,
}

/// Shape block of a run configuration, `{kind, p, ecc, axis}`.
///
/// For `sphere` and `paraboloid` the eccentricity is implied. A plane uses
/// `p` as its offset and `axis` as its normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default)]
    pub ecc: Option<f64>,
    #[serde(default = "default_axis")]
    pub axis: Vec3,
}

fn one() -> f64 {
    1.0
}

fn default_axis() -> Vec3 {
    [0.0, 0.0, 1.0]
}

impl ShapeSpec {
    pub fn build(&self, dim: Dimension) -> Result<Shape> {
        let mut axis = self.axis;
        if dim == Dimension::Circle && axis[0] == 0.0 && axis[1] == 0.0 {
            axis = [1.0, 0.0, 0.0];
        }
        let need_ecc = |lo: f64, hi: f64, what: &str| -> Result<f64> {
            match self.ecc {
                Some(e) if e > lo && e < hi => Ok(e),
                Some(e) => Err(Error::InvalidShape(format!("{what} needs eccentricity in ({lo}, {hi}), got {e}"))),
                None => Err(Error::InvalidShape(format!("{what} needs an eccentricity"))),
            }
        };
        Ok(match self.kind {
            ShapeKind::Sphere => Shape::Conic(ConicOfRevolution::new(dim, self.p, 0.0, axis)?),
            ShapeKind::Paraboloid => Shape::Conic(ConicOfRevolution::new(dim, self.p, 1.0, axis)?),
            ShapeKind::Ellipsoid => Shape::Conic(ConicOfRevolution::new(dim, self.p, need_ecc(0.0, 1.0, "ellipsoid")?, axis)?),
            ShapeKind::Hyperboloid => {
                Shape::Conic(ConicOfRevolution::new(dim, self.p, need_ecc(1.0, f64::INFINITY, "hyperboloid")?, axis)?)
            }
            ShapeKind::Conic => Shape::Conic(ConicOfRevolution::new(dim, self.p, self.ecc.unwrap_or(0.0), axis)?),
            ShapeKind::Plane => Shape::Plane(PlanePiece::new(dim, axis, self.p)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::ChartPoint;

    fn s2(theta: f64, phi: f64) -> PointMetric {
        ChartPoint::sphere(theta, phi).metric()
    }

    #[test]
    fn conic_basics() {
        let sphere = ConicOfRevolution::new(Dimension::Sphere, 2.0, 0.0, [0.0, 0.0, 1.0]).unwrap();
        let j = sphere.jet(&s2(0.7, 1.1)).unwrap();
        assert_eq!(j.rho, 2.0);
        assert_eq!(j.d, [0.0, 0.0]);
        let ell = ConicOfRevolution::new(Dimension::Sphere, 1.0, 0.5, [0.0, 0.0, 1.0]).unwrap();
        let eq = s2(std::f64::consts::FRAC_PI_2, 0.3);
        assert!((ell.rho(&eq.x).unwrap() - 1.0).abs() < 1e-15);
        let a = ell.second_focus().unwrap();
        assert!((a[2] - 4.0 / 3.0).abs() < 1e-15);
        let k = ell.expected_intensity_form(&eq).unwrap();
        assert!((k.a[0][0] - 0.6).abs() < 1e-15);
        let hyp = ConicOfRevolution::new(Dimension::Sphere, 1.0, 2.0, [0.0, 0.0, 1.0]).unwrap();
        assert!((hyp.second_focus().unwrap()[2] + 4.0 / 3.0).abs() < 1e-15);
        let par = ConicOfRevolution::new(Dimension::Sphere, 1.0, 1.0, [0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(par.rho(&[0.0, 0.0, 1.0]), Err(Error::OutsideDomain(_))));
        assert!(par.second_focus().is_err());
        assert!(sphere.second_focus().unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn jets_match_finite_differences() {
        let shapes: Vec<std::sync::Arc<dyn RadialFunction>> = vec![
            std::sync::Arc::new(ConicOfRevolution::new(Dimension::Sphere, 1.3, 0.6, [0.2, -0.4, 0.9]).unwrap()),
            std::sync::Arc::new(ConicOfRevolution::new(Dimension::Sphere, 0.7, 1.8, [0.0, 0.0, 1.0]).unwrap()),
            std::sync::Arc::new(PlanePiece::new(Dimension::Sphere, [0.1, 0.2, -1.0], 0.8).unwrap()),
            std::sync::Arc::new(AxialRadial::new(Dimension::Sphere, [1.0, 1.0, 0.0], AxialProfile::Exp { scale: 1.0, rate: 0.4 }).unwrap()),
        ];
        let h = 1e-4;
        for f in shapes {
            let p = ChartPoint::sphere(2.2, 0.9);
            let m = p.metric();
            let j = f.jet(&m).unwrap();
            let val = |q: ChartPoint| f.jet(&q.metric()).unwrap().rho;
            let mut d2 = SymMat::zeros(Dimension::Sphere);
            for i in 0..2 {
                let fd = (val(p.shifted(i, h)) - val(p.shifted(i, -h))) / (2.0 * h);
                assert!((fd - j.d[i]).abs() < 1e-7, "first derivative {i}");
                for k in 0..2 {
                    let pp = p.shifted(i, h).shifted(k, h);
                    let pm = p.shifted(i, h).shifted(k, -h);
                    let mp = p.shifted(i, -h).shifted(k, h);
                    let mm = p.shifted(i, -h).shifted(k, -h);
                    d2.a[i][k] = (val(pp) - val(pm) - val(mp) + val(mm)) / (4.0 * h * h);
                }
            }
            let cov = m.covariant_hessian(j.d, &d2);
            assert!(cov.max_abs_diff(&j.hess) < 1e-5, "{cov:?} vs {:?}", j.hess);
        }
    }

    #[test]
    fn shape_specs() {
        let json = r#"{"kind": "ellipsoid", "p": 1.0, "ecc": 0.5, "axis": [0, 0, 1]}"#;
        let spec: ShapeSpec = serde_json::from_str(json).unwrap();
        let shape = spec.build(Dimension::Sphere).unwrap();
        assert_eq!(shape.as_conic().unwrap().kind(), ConicKind::Ellipsoid);
        let bad: ShapeSpec = serde_json::from_str(r#"{"kind": "hyperboloid", "ecc": 0.5}"#).unwrap();
        assert!(bad.build(Dimension::Sphere).is_err());
        let circle: ShapeSpec = serde_json::from_str(r#"{"kind": "paraboloid"}"#).unwrap();
        let c = circle.build(Dimension::Circle).unwrap();
        assert_eq!(c.as_conic().unwrap().axis(), [1.0, 0.0, 0.0]);
    }
}
