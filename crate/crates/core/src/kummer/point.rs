use crate::sphere::{axpy, dot, norm, scale, ChartVec, Dimension, PointMetric, SymMat, Vec3};
use crate::{Error, Result};

use super::RadialJet;

/// Below this value of `ê(ẋ)/e(ẋ)` the reflected rays are treated as parallel
/// and the striction distance is infinite.
pub const STRICTION_TOLERANCE: f64 = 1e-10;

/// Reflector geometry at a single point `x ∈ S^n`.
#[derive(Clone, Copy, Debug)]
pub struct KummerPoint {
    pub metric: PointMetric,
    pub jet: RadialJet,
    /// `W = sqrt(ρ² + |∇ρ|²)`
    pub w: f64,
    /// Ambient gradient `e^{ij} ρ_j x_i`.
    pub grad: Vec3,
    pub normal: Vec3,
    /// Reflected direction `x − 2⟨x,N⟩N`.
    pub gamma: Vec3,
    pub kappa: SymMat,
}

/// Directional intensity along a tangent vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionalIntensity {
    /// `sqrt(ê(ẋ)/e(ẋ))`
    pub unsigned: f64,
    /// `κ(ẋ)/e(ẋ)`
    pub signed: f64,
}

/// Striction point of the reflected ray congruence along a tangent direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrictionResult {
    /// Signed distance from `r(x)` along `γ(x)`; `f64::INFINITY` when the rays are parallel.
    pub h: f64,
    pub infinite: bool,
    /// `r(x) + h γ(x)`, absent when `h` is infinite.
    pub point: Option<Vec3>,
    /// `κ(ẋ)/e(ẋ)`, which must vanish (to tolerance) when `h` is infinite.
    pub kappa_ratio: f64,
}

/// Elementary symmetric polynomials `S_1..S_n` of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (k, &v) in values.iter().enumerate() {
        for m in (1..=k + 1).rev() {
            e[m] += v * e[m - 1];
        }
    }
    e.remove(0);
    e
}

impl KummerPoint {
    pub fn new(metric: PointMetric, jet: RadialJet) -> Self {
        let rho = jet.rho;
        let grad_norm2 = metric.norm2_covector(jet.d);
        let w = (rho * rho + grad_norm2).sqrt();
        let grad = metric.ambient_gradient(jet.d);
        let normal = scale(&axpy(&scale(&metric.x, rho), -1.0, &grad), 1.0 / w);
        let xn = dot(&metric.x, &normal);
        let gamma = axpy(&metric.x, -2.0 * xn, &normal);
        let outer = SymMat::outer(metric.dim(), jet.d);
        let kappa = jet
            .hess
            .scale(-rho)
            .axpy(2.0, &outer)
            .axpy(0.5 * (rho * rho - grad_norm2), &metric.metric)
            .scale(2.0 / (w * w));
        KummerPoint { metric, jet, w, grad, normal, gamma, kappa }
    }

    pub fn dim(&self) -> Dimension {
        self.metric.dim()
    }

    pub fn rho(&self) -> f64 {
        self.jet.rho
    }

    /// `r = ρx`
    pub fn position(&self) -> Vec3 {
        scale(&self.metric.x, self.jet.rho)
    }

    /// `ρ^i = e^{ij} ρ_j`
    pub fn rho_up(&self) -> ChartVec {
        self.metric.raise(self.jet.d)
    }

    pub fn grad_norm2(&self) -> f64 {
        self.metric.norm2_covector(self.jet.d)
    }

    /// `r_i = ρ_i x + ρ x_i`
    pub fn tangent(&self, i: usize) -> Vec3 {
        axpy(&scale(&self.metric.x, self.jet.d[i]), self.jet.rho, &self.metric.tangents[i])
    }

    /// `g_ij = ρ_i ρ_j + ρ² e_ij`
    pub fn first_form(&self) -> SymMat {
        SymMat::outer(self.dim(), self.jet.d).axpy(self.jet.rho * self.jet.rho, &self.metric.metric)
    }

    /// `g^ij = (e^ij − ρ^i ρ^j / W²) / ρ²`
    pub fn first_form_inverse(&self) -> SymMat {
        let up = self.rho_up();
        let r2 = self.jet.rho * self.jet.rho;
        self.metric.inverse.axpy(-1.0 / (self.w * self.w), &SymMat::outer(self.dim(), up)).scale(1.0 / r2)
    }

    /// `ρ^{2n−2} W² det e`, the closed form of `det g`.
    pub fn first_form_det_formula(&self) -> f64 {
        let n = self.dim().n() as i32;
        self.jet.rho.powi(2 * n - 2) * self.w * self.w * self.metric.det
    }

    /// `b_ij = (ρ ∇_ij ρ − 2 ρ_i ρ_j − ρ² e_ij) / W`
    pub fn second_form(&self) -> SymMat {
        let rho = self.jet.rho;
        self.jet
            .hess
            .scale(rho)
            .axpy(-2.0, &SymMat::outer(self.dim(), self.jet.d))
            .axpy(-rho * rho, &self.metric.metric)
            .scale(1.0 / self.w)
    }

    /// κ from the second fundamental form: `−κ = e + (2/W) b`.
    pub fn kappa_via_second_form(&self) -> SymMat {
        self.metric.metric.axpy(2.0 / self.w, &self.second_form()).scale(-1.0)
    }

    /// `ê_ij = κ_ik e^{kl} κ_lj`
    pub fn ehat(&self) -> SymMat {
        self.kappa.sandwich(&self.metric.inverse)
    }

    /// `a^i_j = e^{is} κ_sj`
    pub fn mixed(&self) -> [[f64; 2]; 2] {
        self.metric.inverse.mixed(&self.kappa)
    }

    /// κ in the orthonormal frame.
    pub fn kappa_frame(&self) -> SymMat {
        self.metric.to_frame(&self.kappa)
    }

    /// Principal intensities in ascending order.
    pub fn principal_intensities(&self) -> Vec<f64> {
        let e = self.kappa_frame().eigen();
        e.values[..self.dim().n()].to_vec()
    }

    /// `S_1..S_n` of the principal intensities.
    pub fn s_functions(&self) -> Vec<f64> {
        elementary_symmetric(&self.principal_intensities())
    }

    /// `S_1 = e^{ij} κ_ij`
    pub fn s1_trace(&self) -> f64 {
        let a = self.mixed();
        (0..self.dim().n()).map(|i| a[i][i]).sum()
    }

    /// `S_n = det κ / det e`
    pub fn sn_det(&self) -> f64 {
        self.kappa.det() / self.metric.det
    }

    /// `M[ρ] = (−ρΔρ + nρ² + 2|∇ρ|² − (n/2)W²) / (W²/2)`
    pub fn mean_operator(&self) -> f64 {
        let n = self.dim().nf();
        let rho = self.jet.rho;
        let lap = self.metric.inverse.mixed(&self.jet.hess);
        let lap: f64 = (0..self.dim().n()).map(|i| lap[i][i]).sum();
        let w2 = self.w * self.w;
        (-rho * lap + n * rho * rho + 2.0 * self.grad_norm2() - 0.5 * n * w2) / (0.5 * w2)
    }

    /// `P(λ) = det(a^i_j − λ δ^i_j)`, evaluated from the matrix.
    pub fn characteristic(&self, lambda: f64) -> f64 {
        let a = self.mixed();
        match self.dim() {
            Dimension::Circle => a[0][0] - lambda,
            Dimension::Sphere => (a[0][0] - lambda) * (a[1][1] - lambda) - a[0][1] * a[1][0],
        }
    }

    /// `sqrt(det ê / det e)`, the Jacobian of the reflection map.
    pub fn jacobian(&self) -> f64 {
        (self.ehat().det() / self.metric.det).max(0.0).sqrt()
    }

    fn check_tangent(&self, v: ChartVec) -> Result<f64> {
        let e = self.metric.metric.quad(v);
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::ZeroTangent);
        }
        Ok(e)
    }

    pub fn directional_intensity(&self, v: ChartVec) -> Result<DirectionalIntensity> {
        let e = self.check_tangent(v)?;
        Ok(DirectionalIntensity {
            unsigned: (self.ehat().quad(v) / e).max(0.0).sqrt(),
            signed: self.kappa.quad(v) / e,
        })
    }

    /// `h = ρ κ(ẋ) / ê(ẋ)`; positive when the striction point lies ahead along γ.
    pub fn striction(&self, v: ChartVec) -> Result<StrictionResult> {
        let e = self.check_tangent(v)?;
        let eh = self.ehat().quad(v);
        let k = self.kappa.quad(v);
        if eh / e < STRICTION_TOLERANCE {
            return Ok(StrictionResult { h: f64::INFINITY, infinite: true, point: None, kappa_ratio: k / e });
        }
        let h = self.jet.rho * k / eh;
        Ok(StrictionResult {
            h,
            infinite: false,
            point: Some(axpy(&self.position(), h, &self.gamma)),
            kappa_ratio: k / e,
        })
    }

    /// Distance from the full reflected line `{r + sγ}` to `a`.
    pub fn line_distance(&self, a: &Vec3) -> f64 {
        let d = axpy(a, -1.0, &self.position());
        let along = dot(&d, &self.gamma);
        norm(&axpy(&d, -along, &self.gamma))
    }
}
