use crate::sphere::{chart_derivatives, covariant_hessian_from, DerivativeMethod, PointMetric, ScalarField, SymMat, SymTensorField2};

use super::RadialJet;

/// κ for `ρ = exp(−w)`:
/// `(∇²w + ∇w⊗∇w + ((1 − |∇w|²)/2) e) / ((1 + |∇w|²)/2)`.
pub fn conformal_kappa(m: &PointMetric, w: &RadialJet) -> SymMat {
    let g2 = m.norm2_covector(w.d);
    w.hess
        .add(&SymMat::outer(m.dim(), w.d))
        .axpy(0.5 * (1.0 - g2), &m.metric)
        .scale(2.0 / (1.0 + g2))
}

/// κ of `exp(−w)` together with the Schouten tensor `κ (1 + |∇w|²)/2` of `exp(−2w) e`.
#[derive(Clone, Debug)]
pub struct ConformalIntensity {
    pub kappa: SymTensorField2,
    pub schouten: SymTensorField2,
}

pub fn conformal_intensity_form(w: &ScalarField) -> ConformalIntensity {
    let grid = w.grid();
    let cd = chart_derivatives(w, DerivativeMethod::Spectral);
    let hess = covariant_hessian_from(grid, &cd);
    let mut kappa = Vec::with_capacity(w.len());
    let mut schouten = Vec::with_capacity(w.len());
    for (k, m) in grid.metric().points().iter().enumerate() {
        let jet = RadialJet { rho: w.values()[k], d: cd.d[k], hess: hess.values()[k] };
        let kap = conformal_kappa(m, &jet);
        schouten.push(kap.scale(0.5 * (1.0 + m.norm2_covector(jet.d))));
        kappa.push(kap);
    }
    ConformalIntensity {
        kappa: SymTensorField2::new(grid.clone(), kappa),
        schouten: SymTensorField2::new(grid.clone(), schouten),
    }
}
