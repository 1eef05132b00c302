//! Fourth-order finite differences in the chart, for data that is not
//! band-limited. Periodic in θ on S^1 and in longitude on S^2; colatitude
//! stencils continue across the poles along the great circle through them.

use super::field::ScalarField;
use super::grid::Resolution;
use super::ops::ChartDerivatives;
use super::tensor::{Dimension, SymMat};

/// Finite-difference weights for derivatives of order `0..=max_order` at `x0`
/// from values at `nodes` (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

fn periodic(values: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let m = values.len();
    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for j in 0..m {
        let mut a = 0.0;
        let mut b = 0.0;
        for (s, (w1, w2)) in D1.iter().zip(&D2).enumerate() {
            let v = values[(j + m + s - 2) % m];
            a += w1 * v;
            b += w2 * v;
        }
        d1[j] = a / h;
        d2[j] = b / (h * h);
    }
    (d1, d2)
}

pub(crate) fn derivatives(f: &ScalarField) -> ChartDerivatives {
    let grid = f.grid();
    let v = f.values();
    match grid.resolution() {
        Resolution::Circle { .. } => {
            let (d1, d2) = periodic(v, grid.spacing());
            ChartDerivatives {
                d: d1.iter().map(|&a| [a, 0.0]).collect(),
                d2: d2.iter().map(|&b| SymMat::diag(Dimension::Circle, [b, 0.0])).collect(),
            }
        }
        Resolution::Sphere { n_lat, n_lon, .. } => {
            let dphi = 2.0 * std::f64::consts::PI / n_lon as f64;
            let colat: Vec<f64> = (0..n_lat).map(|j| grid.point(j * n_lon).u[0]).collect();

            // longitude derivatives, row by row
            let mut fp = vec![0.0; v.len()];
            let mut fpp = vec![0.0; v.len()];
            for j in 0..n_lat {
                let (a, b) = periodic(&v[j * n_lon..(j + 1) * n_lon], dphi);
                fp[j * n_lon..(j + 1) * n_lon].copy_from_slice(&a);
                fpp[j * n_lon..(j + 1) * n_lon].copy_from_slice(&b);
            }

            // extended meridian coordinate s: ghosts at −θ and 2π − θ sit on the
            // opposite longitude
            let half = n_lon / 2;
            let stencil = |j: usize| -> [(f64, isize, bool); 5] {
                let mut out = [(0.0, 0, false); 5];
                for (s, o) in out.iter_mut().enumerate() {
                    let jj = j as isize + s as isize - 2;
                    *o = if jj < 0 {
                        let r = (-jj - 1) as usize;
                        (-colat[r], r as isize, true)
                    } else if jj >= n_lat as isize {
                        let r = 2 * n_lat - 1 - jj as usize;
                        (2.0 * std::f64::consts::PI - colat[r], r as isize, true)
                    } else {
                        (colat[jj as usize], jj, false)
                    };
                }
                out
            };

            let mut d = vec![[0.0; 2]; v.len()];
            let mut d2 = vec![SymMat::zeros(Dimension::Sphere); v.len()];
            for j in 0..n_lat {
                let st = stencil(j);
                let nodes: Vec<f64> = st.iter().map(|s| s.0).collect();
                let w = fornberg_weights(colat[j], &nodes, 2);
                for k in 0..n_lon {
                    let mut ft = 0.0;
                    let mut ftt = 0.0;
                    let mut ftp = 0.0;
                    for (s, &(_, r, flipped)) in st.iter().enumerate() {
                        let kk = if flipped { (k + half) % n_lon } else { k };
                        let idx = r as usize * n_lon + kk;
                        ft += w[1][s] * v[idx];
                        ftt += w[2][s] * v[idx];
                        ftp += w[1][s] * fp[idx];
                    }
                    let idx = j * n_lon + k;
                    d[idx] = [ft, fp[idx]];
                    d2[idx] = SymMat { dim: Dimension::Sphere, a: [[ftt, ftp], [ftp, fpp[idx]]] };
                }
            }
            ChartDerivatives { d, d2 }
        }
    }
}
