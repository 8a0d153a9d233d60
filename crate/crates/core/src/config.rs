//! Run configuration read from TOML. See `configs/SCHEMA.md` for the schema.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Deserialize;

use crate::asymptotics::MAX_ORDER;
use crate::error::{Error, Result};
use crate::functions::{BoundaryFlux, ScalarFunction, VectorFunction};
use crate::mesh::{build_structured, Mesh, Rect, Side};
use crate::norms::{Analytic, AnalyticComponent};
use crate::systems::{mixed, PressureBc, ProblemData, ProblemKind};

/// Geometric grid `start, start·factor, …` up to and including `stop`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsGrid {
    pub start: f64,
    pub stop: f64,
    pub factor: f64,
}

impl EpsGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.start) || !ok(self.stop) || !(self.factor > 1.0 && self.factor.is_finite()) {
            return Err(Error::Config(format!(
                "eps grid needs positive start and stop and factor > 1, got {}:{}:{}",
                self.start, self.stop, self.factor
            )));
        }
        if self.stop < self.start {
            return Err(Error::Config("eps grid stop is below start".into()));
        }
        // integer exponents keep the points exact powers of the factor
        let steps = ((self.stop / self.start).ln() / self.factor.ln() + 1e-9).floor() as i32;
        Ok((0..=steps).map(|i| self.start * self.factor.powi(i)).collect())
    }
}

impl FromStr for EpsGrid {
    type Err = Error;

    /// `start:stop:factor`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number `{t}` in eps grid `{s}`")))
        };
        match parts.as_slice() {
            [a, b, c] => Ok(EpsGrid {
                start: num(a)?,
                stop: num(b)?,
                factor: num(c)?,
            }),
            _ => Err(Error::Config(format!(
                "eps grid must look like start:stop:factor, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "unit_rect")]
    pub rect: [f64; 4],
}

fn unit_rect() -> [f64; 4] {
    [0.0, 0.0, 1.0, 1.0]
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            nx: 32,
            ny: 32,
            rect: unit_rect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PressureBcKind {
    Neumann,
    Mixed,
    Dirichlet,
}

impl FromStr for PressureBcKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(PressureBcKind::Neumann),
            "mixed" => Ok(PressureBcKind::Mixed),
            "dirichlet" => Ok(PressureBcKind::Dirichlet),
            _ => Err(Error::Config(format!(
                "unknown pressure regime `{s}` (expected neumann, mixed or dirichlet)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureBcConfig {
    pub kind: PressureBcKind,
    /// Sides carrying `p = p_b` in the mixed regime.
    #[serde(default)]
    pub dirichlet_sides: Vec<Side>,
}

impl Default for PressureBcConfig {
    fn default() -> Self {
        PressureBcConfig {
            kind: PressureBcKind::Neumann,
            dirichlet_sides: Vec::new(),
        }
    }
}

/// Expressions in `x` and `y`; vectors are pairs.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub f: Option<[String; 2]>,
    pub div_f: Option<String>,
    pub u_b: [String; 2],
    /// Scalar flux on the Neumann part.
    pub g_b: Option<String>,
    /// Vector whose normal component is the flux.
    pub g_b_vector: Option<[String; 2]>,
    pub p_b: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    pub u: Option<[String; 2]>,
    /// Rows are components: `[[∂x u₁, ∂y u₁], [∂x u₂, ∂y u₂]]`.
    pub grad_u: Option<[[String; 2]; 2]>,
    pub p: Option<String>,
    pub grad_p: Option<[String; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Pp,
    Stokes,
}

impl FromStr for ReferenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pp" => Ok(ReferenceKind::Pp),
            "stokes" => Ok(ReferenceKind::Stokes),
            _ => Err(Error::Config(format!(
                "unknown reference `{s}` (expected pp or stokes)"
            ))),
        }
    }
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Pp => "pp",
            ReferenceKind::Stokes => "stokes",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub reference: ReferenceKind,
    /// Solve the reference on a 2× refined mesh to estimate the floor.
    #[serde(default = "yes")]
    pub floor: bool,
}

fn yes() -> bool {
    true
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            reference: ReferenceKind::Pp,
            floor: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsConfig {
    pub sizes: Vec<usize>,
}

impl Default for MmsConfig {
    fn default() -> Self {
        MmsConfig { sizes: vec![8, 16, 32] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub k: usize,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig { k: 1 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub eps: Option<f64>,
    pub eps_grid: Option<EpsGrid>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub pressure_bc: PressureBcConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub exact: ExactConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub mms: MmsConfig,
    #[serde(default)]
    pub asymptotics: AsymptoticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl<'de> Deserialize<'de> for ProblemKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn vector(v: &[String; 2]) -> Result<VectorFunction> {
    VectorFunction::parse(&v[0], &v[1])
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    /// Everything that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        if self.mesh.nx == 0 || self.mesh.ny == 0 {
            return Err(Error::Config("mesh needs nx, ny >= 1".into()));
        }
        self.rect()?;
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("eps must be positive and finite, got {e}")));
            }
        }
        if let Some(g) = &self.eps_grid {
            g.values()?;
        }
        if self.problem == ProblemKind::Es && self.eps.is_none() && self.eps_grid.is_none() {
            return Err(Error::Config("problem `es` needs eps or eps_grid".into()));
        }
        if self.data.g_b.is_some() && self.data.g_b_vector.is_some() {
            return Err(Error::Config("give at most one of data.g_b and data.g_b_vector".into()));
        }
        if self.pressure_bc.kind == PressureBcKind::Mixed && self.pressure_bc.dirichlet_sides.is_empty() {
            return Err(Error::Config(
                "mixed pressure regime needs pressure_bc.dirichlet_sides".into(),
            ));
        }
        if self.pressure_bc.kind != PressureBcKind::Mixed && !self.pressure_bc.dirichlet_sides.is_empty() {
            return Err(Error::Config(
                "pressure_bc.dirichlet_sides only applies to the mixed regime".into(),
            ));
        }
        if self.mms.sizes.is_empty() || self.mms.sizes.contains(&0) {
            return Err(Error::Config("mms.sizes must be nonempty and positive".into()));
        }
        if self.asymptotics.k > MAX_ORDER {
            return Err(Error::Config(format!("asymptotics.k must be at most {MAX_ORDER}")));
        }
        self.problem_data()?;
        self.exact_velocity()?;
        self.exact_pressure()?;
        Ok(())
    }

    pub fn rect(&self) -> Result<Rect> {
        let [x0, y0, x1, y1] = self.mesh.rect;
        Rect::new(x0, y0, x1, y1)
    }

    pub fn build_mesh(&self, n: Option<usize>) -> Result<Arc<Mesh>> {
        let (nx, ny) = match n {
            Some(n) => (n, n),
            None => (self.mesh.nx, self.mesh.ny),
        };
        Ok(Arc::new(build_structured(nx, ny, self.rect()?)?))
    }

    pub fn regime(&self) -> Result<PressureBc> {
        match self.pressure_bc.kind {
            PressureBcKind::Neumann => Ok(PressureBc::Neumann),
            PressureBcKind::Dirichlet => Ok(PressureBc::Dirichlet),
            PressureBcKind::Mixed => mixed(&self.pressure_bc.dirichlet_sides),
        }
    }

    /// Overrides the regime, keeping the configured mixed sides (left if none).
    pub fn set_regime(&mut self, kind: PressureBcKind) {
        self.pressure_bc.kind = kind;
        match kind {
            PressureBcKind::Mixed if self.pressure_bc.dirichlet_sides.is_empty() => {
                self.pressure_bc.dirichlet_sides = vec![Side::Left];
            }
            PressureBcKind::Mixed => {}
            _ => self.pressure_bc.dirichlet_sides.clear(),
        }
    }

    pub fn problem_data(&self) -> Result<ProblemData> {
        let d = &self.data;
        let mut data = ProblemData::new(vector(&d.u_b)?);
        data.f = d.f.as_ref().map(vector).transpose()?;
        data.div_f = d.div_f.as_deref().map(ScalarFunction::parse).transpose()?;
        data.g_b = match (&d.g_b, &d.g_b_vector) {
            (Some(g), _) => Some(BoundaryFlux::Scalar(ScalarFunction::parse(g)?)),
            (None, Some(v)) => Some(BoundaryFlux::NormalComponent(vector(v)?)),
            (None, None) => None,
        };
        data.p_b = d.p_b.as_deref().map(ScalarFunction::parse).transpose()?;
        data.pressure_bc = self.regime()?;
        Ok(data)
    }

    pub fn exact_velocity(&self) -> Result<Option<Analytic>> {
        let Some(u) = &self.exact.u else {
            if self.exact.grad_u.is_some() {
                return Err(Error::Config("exact.grad_u given without exact.u".into()));
            }
            return Ok(None);
        };
        let grads = match &self.exact.grad_u {
            Some(g) => [Some(vector(&g[0])?), Some(vector(&g[1])?)],
            None => [None, None],
        };
        let comp = |i: usize| -> Result<AnalyticComponent> {
            Ok(AnalyticComponent {
                value: ScalarFunction::parse(&u[i])?,
                gradient: grads[i].as_ref().map(|g| g.components().clone()),
            })
        };
        Ok(Some(Analytic::vector([comp(0)?, comp(1)?])))
    }

    pub fn exact_pressure(&self) -> Result<Option<Analytic>> {
        let Some(p) = &self.exact.p else {
            if self.exact.grad_p.is_some() {
                return Err(Error::Config("exact.grad_p given without exact.p".into()));
            }
            return Ok(None);
        };
        let grad = self.exact.grad_p.as_ref().map(vector).transpose()?;
        Ok(Some(Analytic::scalar(
            ScalarFunction::parse(p)?,
            grad.map(|g| g.components().clone()),
        )))
    }

    /// The ε values to run: the grid if given, else the single `eps`.
    pub fn eps_values(&self) -> Result<Vec<f64>> {
        match (&self.eps_grid, self.eps) {
            (Some(g), _) => g.values(),
            (None, Some(e)) => Ok(vec![e]),
            (None, None) => Err(Error::Config("neither eps nor eps_grid is set".into())),
        }
    }
}
