//! Gauss-Legendre quadrature and orthonormal associated Legendre functions.

use std::f64::consts::PI;

/// Gauss-Legendre nodes on (-1, 1) in descending order, with weights.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Index of `(l, m)` with `0 <= m <= l` in a triangular table.
#[inline]
pub fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

pub fn tri_len(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 2) / 2
}

/// Orthonormal associated Legendre functions `Λ_l^m(cos θ)` (no Condon-Shortley
/// phase), normalized so that `Λ_l^m(cos θ) * {1, √2 cos mφ, √2 sin mφ}` is an
/// orthonormal real spherical harmonic, together with `dΛ/dθ`.
///
/// Requires `sin θ > 0` for the derivative.
pub fn legendre_table(l_max: usize, cos_t: f64, sin_t: f64) -> (Vec<f64>, Vec<f64>) {
    let len = tri_len(l_max);
    let mut p = vec![0.0; len];
    let mut dp = vec![0.0; len];

    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
        }
        p[tri_index(m, m)] = pmm;
        if m < l_max {
            let mf = m as f64;
            p[tri_index(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * cos_t * pmm;
        }
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri_index(l, m)] = a * (cos_t * p[tri_index(l - 1, m)] - b * p[tri_index(l - 2, m)]);
        }
    }

    for m in 0..=l_max {
        for l in m..=l_max {
            let lf = l as f64;
            let mf = m as f64;
            let prev = if l > m { p[tri_index(l - 1, m)] } else { 0.0 };
            let c = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt();
            let c = if l > m { c } else { 0.0 };
            dp[tri_index(l, m)] = (lf * cos_t * p[tri_index(l, m)] - c * prev) / sin_t;
        }
    }
    (p, dp)
}

/// Second θ-derivative from the associated Legendre equation.
#[inline]
pub fn legendre_second_derivative(l: usize, m: usize, cos_t: f64, sin_t: f64, p: f64, dp: f64) -> f64 {
    let lf = l as f64;
    let mf = m as f64;
    -cos_t / sin_t * dp - (lf * (lf + 1.0) - mf * mf / (sin_t * sin_t)) * p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^22 = 2/23, exact for degree ≤ 23
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn legendre_orthonormal_under_quadrature() {
        let l_max = 10;
        let (x, w) = gauss_legendre(l_max + 1);
        let tables: Vec<_> = x.iter().map(|&c| legendre_table(l_max, c, (1.0 - c * c).sqrt())).collect();
        for m in 0..=l_max {
            for l1 in m..=l_max {
                for l2 in m..=l_max {
                    let s: f64 = tables
                        .iter()
                        .zip(&w)
                        .map(|((p, _), w)| w * p[tri_index(l1, m)] * p[tri_index(l2, m)])
                        .sum::<f64>()
                        * 2.0
                        * PI;
                    let expect = if l1 == l2 { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-12, "l1={l1} l2={l2} m={m} s={s}");
                }
            }
        }
    }

    #[test]
    fn theta_derivatives_match_finite_differences() {
        let l_max = 8;
        let theta: f64 = 0.73;
        let h = 1e-5;
        let (_, dp) = legendre_table(l_max, theta.cos(), theta.sin());
        let (pp, dpp) = legendre_table(l_max, (theta + h).cos(), (theta + h).sin());
        let (pm, dpm) = legendre_table(l_max, (theta - h).cos(), (theta - h).sin());
        let (p0, _) = legendre_table(l_max, theta.cos(), theta.sin());
        for l in 0..=l_max {
            for m in 0..=l {
                let k = tri_index(l, m);
                let fd = (pp[k] - pm[k]) / (2.0 * h);
                assert!((fd - dp[k]).abs() < 1e-8, "l={l} m={m}");
                let fd2 = (dpp[k] - dpm[k]) / (2.0 * h);
                let d2 = legendre_second_derivative(l, m, theta.cos(), theta.sin(), p0[k], dp[k]);
                assert!((fd2 - d2).abs() < 1e-6, "l={l} m={m}");
            }
        }
    }
}
