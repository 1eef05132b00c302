//! Spectral transforms: real Fourier series on S^1 (FFT) and real spherical
//! harmonics on S^2 (direct summation over a Gauss-Legendre grid).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::{ChartPoint, Resolution};
use super::legendre::{gauss_legendre, legendre_second_derivative, legendre_table, tri_index};
use super::tensor::{ChartVec, Dimension, SymMat};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Index of the real harmonic `Y_l^m` (`-l <= m <= l`; `m > 0` cosine, `m < 0` sine).
#[inline]
pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

pub fn sh_len(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Spectral coefficients of a scalar field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Spectrum {
    /// `f(θ) = a_0 + Σ_{k=1}^{M/2} (a_k cos kθ + b_k sin kθ)`.
    Circle { a: Vec<f64>, b: Vec<f64> },
    /// Coefficients of orthonormal real spherical harmonics, indexed by [`sh_index`].
    Sphere(Vec<f64>),
}

impl Spectrum {
    /// Degree of every coefficient slot, in storage order (`a` then `b` on S^1).
    pub fn degrees(&self) -> Vec<usize> {
        match self {
            Spectrum::Circle { a, b } => (0..a.len()).chain(0..b.len()).collect(),
            Spectrum::Sphere(c) => {
                let l_max = (c.len() as f64).sqrt() as usize - 1;
                (0..=l_max).flat_map(|l| std::iter::repeat_n(l, 2 * l + 1)).collect()
            }
        }
    }

    /// Multiply every degree-`l` component by `f(l)`.
    pub fn map_degree(&self, f: impl Fn(usize) -> f64) -> Spectrum {
        match self {
            Spectrum::Circle { a, b } => Spectrum::Circle {
                a: a.iter().enumerate().map(|(k, v)| v * f(k)).collect(),
                b: b.iter().enumerate().map(|(k, v)| v * f(k)).collect(),
            },
            Spectrum::Sphere(c) => {
                let degrees = self.degrees();
                Spectrum::Sphere(c.iter().zip(degrees).map(|(v, l)| v * f(l)).collect())
            }
        }
    }

    /// Highest degree with a coefficient above `tol`.
    pub fn effective_degree(&self, tol: f64) -> usize {
        match self {
            Spectrum::Circle { a, b } => (0..a.len())
                .rev()
                .find(|&k| a[k].abs() > tol || b[k].abs() > tol)
                .unwrap_or(0),
            Spectrum::Sphere(c) => {
                let degrees = self.degrees();
                c.iter().zip(degrees).filter(|(v, _)| v.abs() > tol).map(|(_, l)| l).max().unwrap_or(0)
            }
        }
    }

    /// Evaluate the series and its chart partial derivatives at an arbitrary point.
    pub fn eval_point(&self, p: &ChartPoint) -> PointJet {
        match self {
            Spectrum::Circle { a, b } => {
                let t = p.u[0];
                let mut f = a[0];
                let mut d1 = 0.0;
                let mut d2 = 0.0;
                for k in 1..a.len() {
                    let kf = k as f64;
                    let (s, c) = (kf * t).sin_cos();
                    f += a[k] * c + b[k] * s;
                    d1 += kf * (-a[k] * s + b[k] * c);
                    d2 -= kf * kf * (a[k] * c + b[k] * s);
                }
                PointJet {
                    value: f,
                    d: [d1, 0.0],
                    d2: SymMat::diag(Dimension::Circle, [d2, 0.0]),
                }
            }
            Spectrum::Sphere(c) => {
                let l_max = (c.len() as f64).sqrt() as usize - 1;
                let (st, ct) = p.u[0].sin_cos();
                let (pl, dpl) = legendre_table(l_max, ct, st);
                let phi = p.u[1];
                let mut out = [0.0f64; 6]; // f, f_t, f_p, f_tt, f_tp, f_pp
                for m in 0..=l_max {
                    let mf = m as f64;
                    let (sm, cm) = (mf * phi).sin_cos();
                    let w = if m == 0 { 1.0 } else { SQRT2 };
                    for l in m..=l_max {
                        let t = tri_index(l, m);
                        let (pv, dv) = (pl[t], dpl[t]);
                        let d2v = legendre_second_derivative(l, m, ct, st, pv, dv);
                        let cc = c[sh_index(l, m as i64)];
                        let cs = if m > 0 { c[sh_index(l, -(m as i64))] } else { 0.0 };
                        let ang = w * (cc * cm + cs * sm);
                        let dang = w * mf * (-cc * sm + cs * cm);
                        let d2ang = -mf * mf * ang;
                        out[0] += pv * ang;
                        out[1] += dv * ang;
                        out[2] += pv * dang;
                        out[3] += d2v * ang;
                        out[4] += dv * dang;
                        out[5] += pv * d2ang;
                    }
                }
                PointJet {
                    value: out[0],
                    d: [out[1], out[2]],
                    d2: SymMat { dim: Dimension::Sphere, a: [[out[3], out[4]], [out[4], out[5]]] },
                }
            }
        }
    }
}

/// Value plus chart partial derivatives `∂_i f`, `∂_ij f` (not covariant).
#[derive(Clone, Copy, Debug)]
pub struct PointJet {
    pub value: f64,
    pub d: ChartVec,
    pub d2: SymMat,
}

pub(crate) enum Transform {
    Circle(CircleTransform),
    Sphere(Box<SphereTransform>),
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transform::Circle(c) => write!(f, "CircleTransform(m={})", c.m),
            Transform::Sphere(s) => write!(f, "SphereTransform(l_max={})", s.l_max),
        }
    }
}

impl Transform {
    pub(crate) fn new(res: &Resolution) -> Self {
        match *res {
            Resolution::Circle { m } => Transform::Circle(CircleTransform::new(m)),
            Resolution::Sphere { l_max, n_lat, n_lon } => {
                Transform::Sphere(Box::new(SphereTransform::new(l_max, n_lat, n_lon)))
            }
        }
    }

    pub(crate) fn analyze(&self, values: &[f64]) -> Spectrum {
        match self {
            Transform::Circle(c) => c.analyze(values),
            Transform::Sphere(s) => s.analyze(values),
        }
    }

    /// Synthesize the chart partial derivative of order `(o_1, o_2)` at grid points.
    pub(crate) fn synthesize(&self, spec: &Spectrum, order: [usize; 2]) -> Vec<f64> {
        match (self, spec) {
            (Transform::Circle(c), Spectrum::Circle { a, b }) => c.synthesize(a, b, order[0]),
            (Transform::Sphere(s), Spectrum::Sphere(coef)) => s.synthesize(coef, order),
            _ => panic!("spectrum does not match the grid dimension"),
        }
    }
}

pub(crate) struct CircleTransform {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl CircleTransform {
    fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        CircleTransform { m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    fn analyze(&self, values: &[f64]) -> Spectrum {
        let m = self.m;
        let nyq = m / 2;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / m as f64;
        let mut a = vec![0.0; nyq + 1];
        let mut b = vec![0.0; nyq + 1];
        a[0] = buf[0].re * scale;
        for k in 1..nyq {
            a[k] = 2.0 * buf[k].re * scale;
            b[k] = -2.0 * buf[k].im * scale;
        }
        a[nyq] = buf[nyq].re * scale;
        Spectrum::Circle { a, b }
    }

    fn synthesize(&self, a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
        let m = self.m;
        let nyq = m / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        // (ik)^order
        let mult = |k: f64| -> Complex64 {
            match order {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, k),
                2 => Complex64::new(-k * k, 0.0),
                _ => Complex64::new(0.0, k).powu(order as u32),
            }
        };
        buf[0] = Complex64::new(a[0], 0.0) * mult(0.0);
        for k in 1..nyq {
            let c = Complex64::new(0.5 * a[k], -0.5 * b[k]);
            let kf = k as f64;
            buf[k] = c * mult(kf);
            buf[m - k] = c.conj() * mult(-kf);
        }
        let nf = nyq as f64;
        buf[nyq] = match order % 2 {
            0 => Complex64::new(a[nyq], 0.0) * mult(nf),
            _ => Complex64::new(0.0, 0.0),
        };
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }
}

pub(crate) struct SphereTransform {
    l_max: usize,
    n_lat: usize,
    n_lon: usize,
    gw: Vec<f64>,
    p: Vec<Vec<f64>>,
    dp: Vec<Vec<f64>>,
    d2p: Vec<Vec<f64>>,
    /// `cos(m φ_k)` at `[k * (l_max + 1) + m]`
    cos_mphi: Vec<f64>,
    sin_mphi: Vec<f64>,
}

impl SphereTransform {
    fn new(l_max: usize, n_lat: usize, n_lon: usize) -> Self {
        let (nodes, gw) = gauss_legendre(n_lat);
        let cos_t = nodes.clone();
        let sin_t: Vec<f64> = nodes.iter().map(|c| (1.0 - c * c).sqrt()).collect();
        let mut p = Vec::with_capacity(n_lat);
        let mut dp = Vec::with_capacity(n_lat);
        let mut d2p = Vec::with_capacity(n_lat);
        for j in 0..n_lat {
            let (pj, dpj) = legendre_table(l_max, cos_t[j], sin_t[j]);
            let mut d2 = vec![0.0; pj.len()];
            for m in 0..=l_max {
                for l in m..=l_max {
                    let t = tri_index(l, m);
                    d2[t] = legendre_second_derivative(l, m, cos_t[j], sin_t[j], pj[t], dpj[t]);
                }
            }
            p.push(pj);
            dp.push(dpj);
            d2p.push(d2);
        }
        let dphi = 2.0 * PI / n_lon as f64;
        let mut cos_mphi = vec![0.0; n_lon * (l_max + 1)];
        let mut sin_mphi = vec![0.0; n_lon * (l_max + 1)];
        for k in 0..n_lon {
            for m in 0..=l_max {
                let (s, c) = (m as f64 * k as f64 * dphi).sin_cos();
                cos_mphi[k * (l_max + 1) + m] = c;
                sin_mphi[k * (l_max + 1) + m] = s;
            }
        }
        SphereTransform { l_max, n_lat, n_lon, gw, p, dp, d2p, cos_mphi, sin_mphi }
    }

    fn analyze(&self, values: &[f64]) -> Spectrum {
        let lm1 = self.l_max + 1;
        let dphi = 2.0 * PI / self.n_lon as f64;
        let mut coef = vec![0.0; sh_len(self.l_max)];
        let mut am = vec![0.0; lm1];
        let mut bm = vec![0.0; lm1];
        for j in 0..self.n_lat {
            am.iter_mut().for_each(|v| *v = 0.0);
            bm.iter_mut().for_each(|v| *v = 0.0);
            let row = &values[j * self.n_lon..(j + 1) * self.n_lon];
            for (k, &f) in row.iter().enumerate() {
                let cs = &self.cos_mphi[k * lm1..(k + 1) * lm1];
                let sn = &self.sin_mphi[k * lm1..(k + 1) * lm1];
                for m in 0..lm1 {
                    am[m] += f * cs[m];
                    bm[m] += f * sn[m];
                }
            }
            let w = self.gw[j] * dphi;
            let pj = &self.p[j];
            for m in 0..lm1 {
                let (ca, cb) = if m == 0 { (w * am[0], 0.0) } else { (w * SQRT2 * am[m], w * SQRT2 * bm[m]) };
                for l in m..=self.l_max {
                    let pv = pj[tri_index(l, m)];
                    coef[sh_index(l, m as i64)] += pv * ca;
                    if m > 0 {
                        coef[sh_index(l, -(m as i64))] += pv * cb;
                    }
                }
            }
        }
        Spectrum::Sphere(coef)
    }

    fn synthesize(&self, coef: &[f64], order: [usize; 2]) -> Vec<f64> {
        let lm1 = self.l_max + 1;
        let mut out = vec![0.0; self.n_lat * self.n_lon];
        let mut cm = vec![0.0; lm1];
        let mut sm = vec![0.0; lm1];
        for j in 0..self.n_lat {
            let table = match order[0] {
                0 => &self.p[j],
                1 => &self.dp[j],
                2 => &self.d2p[j],
                o => panic!("unsupported colatitude derivative order {o}"),
            };
            for m in 0..lm1 {
                let mut c = 0.0;
                let mut s = 0.0;
                for l in m..=self.l_max {
                    let pv = table[tri_index(l, m)];
                    c += coef[sh_index(l, m as i64)] * pv;
                    if m > 0 {
                        s += coef[sh_index(l, -(m as i64))] * pv;
                    }
                }
                let w = if m == 0 { 1.0 } else { SQRT2 };
                cm[m] = w * c;
                sm[m] = w * s;
            }
            let row = &mut out[j * self.n_lon..(j + 1) * self.n_lon];
            for (k, v) in row.iter_mut().enumerate() {
                let cs = &self.cos_mphi[k * lm1..(k + 1) * lm1];
                let sn = &self.sin_mphi[k * lm1..(k + 1) * lm1];
                let mut acc = 0.0;
                for m in 0..lm1 {
                    let mf = m as f64;
                    acc += match order[1] {
                        0 => cm[m] * cs[m] + sm[m] * sn[m],
                        1 => mf * (-cm[m] * sn[m] + sm[m] * cs[m]),
                        2 => -mf * mf * (cm[m] * cs[m] + sm[m] * sn[m]),
                        o => panic!("unsupported longitude derivative order {o}"),
                    };
                }
                *v = acc;
            }
        }
        out
    }
}
