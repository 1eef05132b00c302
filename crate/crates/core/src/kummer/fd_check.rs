//! Finite-difference checks of the reflection map: `γ_i` is obtained by
//! centered differences of `γ` in chart coordinates and compared with the
//! closed-form identities.

use rayon::prelude::*;

use crate::sphere::{dot, Vec3};
use crate::Result;

use super::RadialHypersurface;

/// Sup-norm defects of the finite-difference identities at chart step `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdDefects {
    pub h: f64,
    /// `max |⟨γ_i, γ_j⟩ − ê_ij|`
    pub ehat: f64,
    /// `max |⟨r_i, γ_j⟩ − ⟨r_j, γ_i⟩|`
    pub symmetry: f64,
    /// `max |⟨γ_i, N⟩ + (ρ^j/W) κ_ji|`
    pub normal: f64,
}

fn central(plus: &Vec3, minus: &Vec3, h: f64) -> Vec3 {
    [(plus[0] - minus[0]) / (2.0 * h), (plus[1] - minus[1]) / (2.0 * h), (plus[2] - minus[2]) / (2.0 * h)]
}

pub fn finite_difference_defects(r: &RadialHypersurface, h: f64) -> Result<FdDefects> {
    let n = r.dimension().n();
    let rows = (0..r.len())
        .into_par_iter()
        .map(|k| -> Result<[f64; 3]> {
            let p = r.point(k);
            let u = p.metric.point;
            let mut dg = [[0.0; 3]; 2];
            for (i, d) in dg.iter_mut().enumerate().take(n) {
                let plus = r.at(&u.shifted(i, h))?.gamma;
                let minus = r.at(&u.shifted(i, -h))?.gamma;
                *d = central(&plus, &minus, h);
            }
            let ehat = p.ehat();
            let up = p.rho_up();
            let mut e_def: f64 = 0.0;
            let mut n_def: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    e_def = e_def.max((dot(&dg[i], &dg[j]) - ehat.a[i][j]).abs());
                }
                let rhs: f64 = (0..n).map(|j| up[j] * p.kappa.a[j][i]).sum::<f64>() / p.w;
                n_def = n_def.max((dot(&dg[i], &p.normal) + rhs).abs());
            }
            let s_def = if n == 2 {
                (dot(&p.tangent(0), &dg[1]) - dot(&p.tangent(1), &dg[0])).abs()
            } else {
                0.0
            };
            Ok([e_def, s_def, n_def])
        })
        .collect::<Result<Vec<_>>>()?;
    let max = |c: usize| rows.iter().map(|r| r[c]).fold(0.0, f64::max);
    Ok(FdDefects { h, ehat: max(0), symmetry: max(1), normal: max(2) })
}

/// Sup over points and `i` of `|⟨γ_i, N⟩ + (ρ^j/W) κ_ji|` at chart step `h`.
pub fn normal_component_check(r: &RadialHypersurface, h: f64) -> Result<f64> {
    Ok(finite_difference_defects(r, h)?.normal)
}
