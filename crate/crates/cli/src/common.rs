use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use kummer::kummer::RadialHypersurface;
use kummer::shapes::{Shape, ShapeKind, ShapeSpec};
use kummer::sphere::{Dimension, Resolution, ScalarFieldDocument, SphereGrid};
use serde::Serialize;

/// Exit code 2 for bad input, 1 for a failed computation or check.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<kummer::Error> for CliError {
    fn from(e: kummer::Error) -> Self {
        use kummer::Error as E;
        match e {
            E::UnsupportedDimension(_)
            | E::Resolution(_)
            | E::InvalidShape(_)
            | E::OutsideDomain(_)
            | E::InvalidProblem(_)
            | E::HypothesisViolated(_)
            | E::DensityBound { .. }
            | E::ZeroDensity
            | E::Binning(_)
            | E::EmptyBatch
            | E::Json(_)
            | E::Io(_) => CliError::Config(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// One named pass/fail line of a report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < tolerance`; NaN fails.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value < tolerance }
    }

    pub fn flag(name: impl Into<String>, value: f64, tolerance: f64, passed: bool) -> Self {
        Check { name: name.into(), value, tolerance, passed }
    }
}

pub fn log_checks(checks: &[Check]) {
    for c in checks {
        let tag = if c.passed { "ok  " } else { "FAIL" };
        eprintln!("  {tag} {:<32} {:.3e} (tolerance {:.1e})", c.name, c.value, c.tolerance);
    }
}

pub struct OutputDir(PathBuf);

impl OutputDir {
    pub fn create(path: &Path) -> CliResult<Self> {
        fs::create_dir_all(path)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", path.display())))?;
        Ok(OutputDir(path.to_path_buf()))
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        let path = self.0.join(name);
        fs::write(&path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_kind(s: &str) -> Result<ShapeKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        format!("unknown shape '{s}', expected sphere, ellipsoid, paraboloid, hyperboloid, conic or plane")
    })
}

/// Reflector input: an analytic shape or a field file, plus the grid.
#[derive(Args, Clone, Debug)]
pub struct GeometryArgs {
    /// Analytic shape.
    #[arg(long, value_parser = parse_kind)]
    pub shape: Option<ShapeKind>,
    /// Focal parameter, or the offset for a plane.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long)]
    pub ecc: Option<f64>,
    /// Symmetry axis (plane normal) as x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub axis: Option<Vec<f64>>,
    /// Radial field JSON as written by `solve`.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Sphere dimension: 1 for the circle, 2 for the sphere.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Spectral degree on S^2.
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Number of points on S^1.
    #[arg(long = "M")]
    pub m: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryEcho {
    pub dimension: usize,
    pub grid: Resolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub points: usize,
}

pub struct Geometry {
    pub surface: RadialHypersurface,
    pub shape: Option<Shape>,
    pub echo: GeometryEcho,
}

pub fn grid_for(n: usize, l: Option<usize>, m: Option<usize>, default_l: usize, default_m: usize) -> CliResult<Arc<SphereGrid>> {
    let res = match Dimension::from_n(n)? {
        Dimension::Circle => {
            if l.is_some() {
                return Err(CliError::Config("--L applies to S^2; use --M on S^1".into()));
            }
            Resolution::circle(m.unwrap_or(default_m))
        }
        Dimension::Sphere => {
            if m.is_some() {
                return Err(CliError::Config("--M applies to S^1; use --L on S^2".into()));
            }
            Resolution::sphere(l.unwrap_or(default_l))
        }
    };
    Ok(Arc::new(SphereGrid::new(res)?))
}

impl GeometryArgs {
    pub fn grid(&self) -> CliResult<Arc<SphereGrid>> {
        grid_for(self.n, self.l, self.m, 32, 512)
    }

    pub fn shape_spec(&self) -> CliResult<Option<ShapeSpec>> {
        let Some(kind) = self.shape else { return Ok(None) };
        let axis = match &self.axis {
            None => [0.0, 0.0, 1.0],
            Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
            Some(v) => return Err(CliError::Config(format!("--axis needs three components, got {}", v.len()))),
        };
        Ok(Some(ShapeSpec { kind, p: self.p, ecc: self.ecc, axis }))
    }

    pub fn build(&self) -> CliResult<Geometry> {
        match (self.shape_spec()?, &self.field) {
            (Some(_), Some(_)) => Err(CliError::Config("give either --shape or --field, not both".into())),
            (None, None) => Err(CliError::Config("a reflector is required: --shape or --field".into())),
            (Some(spec), None) => {
                let grid = self.grid()?;
                let shape = spec.build(grid.dimension())?;
                let surface = RadialHypersurface::on_domain(&grid, shape.function())?;
                let echo = GeometryEcho {
                    dimension: grid.dimension().n(),
                    grid: grid.resolution(),
                    shape: Some(spec),
                    field: None,
                    points: surface.len(),
                };
                Ok(Geometry { surface, shape: Some(shape), echo })
            }
            (None, Some(path)) => {
                if self.l.is_some() || self.m.is_some() {
                    return Err(CliError::Config("the grid of a field file is fixed by the file".into()));
                }
                let doc: ScalarFieldDocument = serde_json::from_str(&read_file(path)?)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let field = doc.into_field(None)?;
                let surface = RadialHypersurface::from_field(&field)?;
                let grid = field.grid();
                let echo = GeometryEcho {
                    dimension: grid.dimension().n(),
                    grid: grid.resolution(),
                    shape: None,
                    field: Some(path.display().to_string()),
                    points: surface.len(),
                };
                Ok(Geometry { surface, shape: None, echo })
            }
        }
    }
}

/// Observed order `ln(e₀/e₁) / ln(h₀/h₁)` between consecutive levels of spacing `h`.
pub fn orders(h: &[f64], e: &[f64]) -> Vec<f64> {
    (1..h.len()).map(|i| (e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln()).collect()
}
