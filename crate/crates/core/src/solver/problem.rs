use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kummer::{KummerPoint, RadialFunction};
use crate::shapes::{AxialProfile, AxialRadial};
use crate::sphere::{Dimension, PointMetric, Vec3};
use crate::{Error, Result};

type GFn = dyn Fn(&Vec3, f64) -> f64 + Send + Sync;

/// Prescribed data `g(x, ρ)` of the mean intensity equation `S₁ = n g`.
#[derive(Clone)]
pub enum SourceTerm {
    /// `g ≡ value`
    Constant { value: f64 },
    /// `g = scale · ρ^exponent`
    Power { scale: f64, exponent: f64 },
    /// `g(ρ)` piecewise linear through the knots, independent of `x`.
    Table { rho: Vec<f64>, g: Vec<f64> },
    /// `g(x, ρ) = (S₁(ρ*)(x)/n) · ρ*(x)/ρ`, solved exactly by `ρ*`.
    Manufactured { target: AxialRadial },
    /// Arbitrary callable; without a derivative `∂g/∂ρ` is differenced numerically.
    Custom { g: Arc<GFn>, dg: Option<Arc<GFn>> },
}

impl fmt::Debug for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTerm::Constant { value } => write!(f, "Constant({value})"),
            SourceTerm::Power { scale, exponent } => write!(f, "Power({scale} ρ^{exponent})"),
            SourceTerm::Table { rho, .. } => write!(f, "Table({} knots)", rho.len()),
            SourceTerm::Manufactured { target } => write!(f, "Manufactured({:?})", target.profile()),
            SourceTerm::Custom { dg, .. } => write!(f, "Custom(analytic dg: {})", dg.is_some()),
        }
    }
}

impl SourceTerm {
    pub fn custom(g: impl Fn(&Vec3, f64) -> f64 + Send + Sync + 'static) -> Self {
        SourceTerm::Custom { g: Arc::new(g), dg: None }
    }

    /// `ρ* = R̄ exp(amplitude ⟨x,u⟩)`.
    pub fn manufactured(dim: Dimension, r_bar: f64, amplitude: f64, axis: Vec3) -> Result<Self> {
        let target = AxialRadial::new(dim, axis, AxialProfile::Exp { scale: r_bar, rate: amplitude })?;
        Ok(SourceTerm::Manufactured { target })
    }

    /// `ρ*` of a manufactured term.
    pub fn exact_solution(&self) -> Option<&AxialRadial> {
        match self {
            SourceTerm::Manufactured { target } => Some(target),
            _ => None,
        }
    }

    fn table_segment(rho: &[f64], r: f64) -> usize {
        rho.partition_point(|&k| k <= r).clamp(1, rho.len() - 1) - 1
    }

    /// `(g, ∂g/∂ρ)` at `(x, ρ)`; `fd_step` is used only when no derivative is known.
    pub fn eval(&self, m: &PointMetric, rho: f64, fd_step: f64) -> Result<(f64, f64)> {
        Ok(match self {
            SourceTerm::Constant { value } => (*value, 0.0),
            SourceTerm::Power { scale, exponent } => {
                let g = scale * rho.powf(*exponent);
                (g, exponent * g / rho)
            }
            SourceTerm::Table { rho: knots, g } => {
                let i = Self::table_segment(knots, rho);
                let slope = (g[i + 1] - g[i]) / (knots[i + 1] - knots[i]);
                (g[i] + slope * (rho - knots[i]), slope)
            }
            SourceTerm::Manufactured { target } => {
                let p = KummerPoint::new(*m, target.jet(m)?);
                let n = m.dim().nf();
                let g = p.s1_trace() / n * p.rho() / rho;
                (g, -g / rho)
            }
            SourceTerm::Custom { g, dg } => {
                let x = m.x;
                let v = g(&x, rho);
                let d = match dg {
                    Some(dg) => dg(&x, rho),
                    None => (g(&x, rho + fd_step) - g(&x, rho - fd_step)) / (2.0 * fd_step),
                };
                (v, d)
            }
        })
    }
}

/// The prescribed mean intensity problem on the annulus `S^n × [R₁, R₂]`.
#[derive(Clone, Debug)]
pub struct AnnulusProblem {
    dim: Dimension,
    r1: f64,
    r2: f64,
    g: SourceTerm,
}

impl AnnulusProblem {
    pub fn new(dim: Dimension, r1: f64, r2: f64, g: SourceTerm) -> Result<Self> {
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(Error::InvalidProblem(format!("need 0 < R1 < R2, got R1 = {r1}, R2 = {r2}")));
        }
        match &g {
            SourceTerm::Constant { value } if !(*value > 0.0) => {
                return Err(Error::InvalidProblem(format!("g must be positive, got {value}")));
            }
            SourceTerm::Power { scale, exponent } if !(*scale > 0.0 && exponent.is_finite()) => {
                return Err(Error::InvalidProblem(format!("g = {scale} ρ^{exponent} is not positive")));
            }
            SourceTerm::Table { rho, g } => {
                if rho.len() < 2 || rho.len() != g.len() {
                    return Err(Error::InvalidProblem("table needs matching rho/g lists of length ≥ 2".into()));
                }
                if rho.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidProblem("table rho knots must increase".into()));
                }
                if rho[0] > r1 || rho[rho.len() - 1] < r2 {
                    return Err(Error::InvalidProblem("table must cover [R1, R2]".into()));
                }
                if g.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidProblem("table values must be positive".into()));
                }
            }
            SourceTerm::Manufactured { target } => {
                if target.dimension() != dim {
                    return Err(Error::GridMismatch);
                }
                if let AxialProfile::Exp { scale, rate } = target.profile() {
                    let (lo, hi) = (scale * (-rate.abs()).exp(), scale * rate.abs().exp());
                    if !(lo > r1 && hi < r2) {
                        return Err(Error::InvalidProblem(format!(
                            "manufactured solution range [{lo}, {hi}] is not inside ({r1}, {r2})"
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(AnnulusProblem { dim, r1, r2, g })
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    pub fn source(&self) -> &SourceTerm {
        &self.g
    }

    /// Step for central differences in ρ.
    pub fn fd_step(&self) -> f64 {
        (self.r2 - self.r1) * 1e-5
    }

    pub fn g(&self, m: &PointMetric, rho: f64) -> Result<f64> {
        Ok(self.g.eval(m, rho, self.fd_step())?.0)
    }

    /// `(ḡ, ∂ḡ/∂ρ)` with `ḡ = n g`.
    pub fn g_bar(&self, m: &PointMetric, rho: f64) -> Result<(f64, f64)> {
        let (g, dg) = self.g.eval(m, rho, self.fd_step())?;
        let n = self.dim.nf();
        Ok((n * g, n * dg))
    }
}

/// Shift used by the Picard splitting `(Δ̂ − σ) w⁺ = Q^t(w) − σ w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum PicardShift {
    /// `σ = 0`: the plain map `w ↦ Δ̂⁻¹ Q^t(w)`.
    None,
    Fixed(f64),
    /// `σ = max(mean ∂Q^t/∂w, n/2 + margin)`, recomputed every iteration.
    Adaptive,
}

fn default_epsilon() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    0.1
}
fn default_dt_min() -> f64 {
    1e-4
}
fn default_tau() -> f64 {
    0.5
}
fn default_max_iterations() -> usize {
    400
}
fn default_shift() -> PicardShift {
    PicardShift::Adaptive
}
fn default_margin() -> f64 {
    0.25
}

/// Continuation and Picard parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Defaults to `sqrt(R₁ R₂)`.
    #[serde(default)]
    pub r_bar: Option<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    /// Damping `w ← (1 − τ) w + τ T(w)`.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Tolerance on `sup |w_{k+1} − w_k|`; defaults to 1e-10 on S^1 and 1e-8 on S^2.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Tolerance on `sup |Δ̂w − Q^t|`; defaults to ten times the step tolerance.
    #[serde(default)]
    pub residual_tolerance: Option<f64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_shift")]
    pub shift: PicardShift,
    #[serde(default = "default_margin")]
    pub shift_margin: f64,
    /// Solve even when the barrier hypotheses fail.
    #[serde(default)]
    pub force: bool,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        HomotopyConfig {
            epsilon: default_epsilon(),
            r_bar: None,
            dt: default_dt(),
            dt_min: default_dt_min(),
            tau: default_tau(),
            tolerance: None,
            residual_tolerance: None,
            max_iterations: default_max_iterations(),
            shift: default_shift(),
            shift_margin: default_margin(),
            force: false,
        }
    }
}

impl HomotopyConfig {
    pub fn validate(&self, problem: &AnnulusProblem) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        let rb = self.r_bar(problem);
        if !(rb > problem.r1 && rb < problem.r2) {
            return bad(format!("R̄ = {rb} is not inside (R1, R2)"));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0 && self.dt_min > 0.0 && self.dt_min <= self.dt) {
            return bad(format!("bad step schedule dt = {}, dt_min = {}", self.dt, self.dt_min));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if !(self.tolerance(problem.dim) > 0.0 && self.residual_tolerance(problem.dim) > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_iterations == 0 || !(self.shift_margin > 0.0) {
            return bad("max_iterations and shift_margin must be positive".into());
        }
        Ok(())
    }

    pub fn r_bar(&self, problem: &AnnulusProblem) -> f64 {
        self.r_bar.unwrap_or_else(|| (problem.r1 * problem.r2).sqrt())
    }

    pub fn tolerance(&self, dim: Dimension) -> f64 {
        self.tolerance.unwrap_or(match dim {
            Dimension::Circle => 1e-10,
            Dimension::Sphere => 1e-8,
        })
    }

    pub fn residual_tolerance(&self, dim: Dimension) -> f64 {
        self.residual_tolerance.unwrap_or(10.0 * self.tolerance(dim))
    }
}

/// JSON description of `g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SourceSpec {
    Constant {
        value: f64,
    },
    Power {
        /// Defaults to `sqrt(R₁ R₂)`.
        #[serde(default)]
        scale: Option<f64>,
        exponent: f64,
    },
    Table {
        rho: Vec<f64>,
        g: Vec<f64>,
    },
    Manufactured {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_axis")]
        axis: Vec3,
        /// Defaults to `sqrt(R₁ R₂)`.
        #[serde(default)]
        scale: Option<f64>,
    },
}

fn default_amplitude() -> f64 {
    0.1
}
fn default_axis() -> Vec3 {
    [0.0, 0.0, 1.0]
}

/// Problem file: `{n, R1, R2, g, solver, resolution, output}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub n: usize,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub g: SourceSpec,
    #[serde(default)]
    pub solver: HomotopyConfig,
    /// Points on S^1 or degree on S^2; the caller picks a default when absent.
    #[serde(default)]
    pub resolution: Option<usize>,
    #[serde(default)]
    pub output: Option<String>,
}

impl ProblemSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn build(&self) -> Result<AnnulusProblem> {
        let dim = Dimension::from_n(self.n)?;
        let geo = (self.r1 * self.r2).sqrt();
        let g = match &self.g {
            SourceSpec::Constant { value } => SourceTerm::Constant { value: *value },
            SourceSpec::Power { scale, exponent } => {
                SourceTerm::Power { scale: scale.unwrap_or(geo), exponent: *exponent }
            }
            SourceSpec::Table { rho, g } => SourceTerm::Table { rho: rho.clone(), g: g.clone() },
            SourceSpec::Manufactured { amplitude, axis, scale } => {
                let axis = if dim == Dimension::Circle && axis[0] == 0.0 && axis[1] == 0.0 {
                    [1.0, 0.0, 0.0]
                } else {
                    *axis
                };
                SourceTerm::manufactured(dim, scale.unwrap_or(geo), *amplitude, axis)?
            }
        };
        let problem = AnnulusProblem::new(dim, self.r1, self.r2, g)?;
        self.solver.validate(&problem)?;
        Ok(problem)
    }
}
