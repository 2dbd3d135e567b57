use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{GateMode, InitialData, SolverMethod};
use crate::gf::{make_ladder, EpsilonLadder};
use crate::mizohata::{
    solver_grid, CoefficientB, CoefficientSpec, GridSource, SeparableSource, Source,
};
use crate::mollifier::{build_bump, build_moment_free, HSchedule, Mollifier, MollifierKind};
use crate::numerics::Grid2D;
use crate::{GfError, Result};

/// Config schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

fn config_err(msg: impl Into<String>) -> GfError {
    GfError::Config(msg.into())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Manufactured {
        radius: f64,
        sigma: f64,
    },
    Separable {
        center: f64,
        radius: f64,
        sigma: f64,
    },
    OddInT {
        radius: f64,
        sigma: f64,
    },
    Growth {
        center: f64,
        radius: f64,
        k: f64,
        kappa: f64,
    },
    Zero,
    /// JSON file with `grid` (a `Grid2D`) and `values` (`[re, im]` pairs,
    /// row-major over `(t, x)`).
    GridFile {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_half: f64,
    /// Odd, so that `t = 0` is a node.
    pub t_points: usize,
    pub x_half: f64,
    pub x_points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub e0: f64,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MollifierConfig {
    pub kind: MollifierKind,
    /// Support radius (bump) or spectral cutoff (moment-free).
    pub parameter: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub kf: f64,
    pub residual: f64,
    pub pairing: f64,
    pub association: f64,
    pub reg_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kf: 1e-10,
            residual: 1e-3,
            pairing: 1e-4,
            association: 1e-4,
            reg_residual: 1e-8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Zero,
    Gaussian { sigma: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssociationConfig {
    pub radius: f64,
    pub bumps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckHConfig {
    /// Growth constant `C`; computed from the problem when absent.
    pub constant: Option<f64>,
    #[serde(default = "one")]
    pub order: usize,
    #[serde(default = "p_max")]
    pub p_max: usize,
}

fn one() -> usize {
    1
}

fn p_max() -> usize {
    12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiagnoseTarget {
    Zero,
    Dirac { at: Vec<f64> },
    Heaviside { at: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    /// Net stored as JSON (see `Net::write_json`).
    pub net: PathBuf,
    pub alpha: Vec<usize>,
    #[serde(default = "q_max")]
    pub q_max: usize,
    pub target: Option<DiagnoseTarget>,
    pub x0: Option<Vec<f64>>,
}

fn q_max() -> usize {
    4
}

/// Versioned scenario description shared by every subcommand.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub label: String,
    pub coefficient: CoefficientSpec,
    pub source: SourceConfig,
    pub grid: GridConfig,
    pub ladder: LadderConfig,
    pub schedule: HSchedule,
    pub mollifier: MollifierConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "zero_initial")]
    pub initial: InitialConfig,
    #[serde(default = "enforce")]
    pub gate: GateMode,
    #[serde(default = "auto")]
    pub method: SolverMethod,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_association")]
    pub association: AssociationConfig,
    pub check_h: Option<CheckHConfig>,
    pub diagnose: Option<DiagnoseConfig>,
    pub output_dir: Option<PathBuf>,
}

fn zero_initial() -> InitialConfig {
    InitialConfig::Zero
}

fn enforce() -> GateMode {
    GateMode::Enforce
}

fn auto() -> SolverMethod {
    SolverMethod::Auto
}

pub fn default_seed() -> u64 {
    20240601
}

fn default_association() -> AssociationConfig {
    AssociationConfig {
        radius: 0.25,
        bumps: 5,
    }
}

impl ScenarioConfig {
    /// Parses and validates; relative file paths resolve against the
    /// config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let raw: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        match raw.get("schema_version").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => {
                return Err(config_err(format!(
                    "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(config_err("missing integer field 'schema_version'")),
        }
        let mut cfg: ScenarioConfig = serde_json::from_value(raw)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let SourceConfig::GridFile { path: p } = &mut cfg.source {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(d) = &mut cfg.diagnose {
            if d.net.is_relative() {
                d.net = base.join(&d.net);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("kf", t.kf),
            ("residual", t.residual),
            ("pairing", t.pairing),
            ("association", t.association),
            ("reg_residual", t.reg_residual),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!(
                    "tolerance '{name}' must be positive, got {v}"
                )));
            }
        }
        if self.grid.t_points % 2 == 0 {
            return Err(config_err(
                "grid.t_points must be odd so that t = 0 is a node",
            ));
        }
        if let SourceConfig::GridFile { path } = &self.source {
            if !path.exists() {
                return Err(config_err(format!(
                    "source grid file {} does not exist",
                    path.display()
                )));
            }
        }
        if let Some(d) = &self.diagnose {
            if !d.net.exists() {
                return Err(config_err(format!(
                    "diagnose net {} does not exist",
                    d.net.display()
                )));
            }
        }
        if self.association.bumps == 0 || !(self.association.radius > 0.0) {
            return Err(config_err(
                "association needs a positive radius and at least one bump",
            ));
        }
        Ok(())
    }

    pub fn coefficient(&self) -> Result<CoefficientB> {
        CoefficientB::from_spec(&self.coefficient)
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let g = &self.grid;
        solver_grid(g.t_half, g.t_points, g.x_half, g.x_points)
    }

    pub fn ladder(&self) -> Result<EpsilonLadder> {
        make_ladder(self.ladder.e0, self.ladder.ratio, self.ladder.count)
    }

    pub fn mollifier(&self) -> Result<Mollifier> {
        match self.mollifier.kind {
            MollifierKind::Bump => build_bump(self.mollifier.parameter),
            MollifierKind::MomentFree => build_moment_free(self.mollifier.parameter),
        }
    }

    pub fn source(&self, coeff: &CoefficientB) -> Result<Arc<dyn Source>> {
        Ok(match &self.source {
            SourceConfig::Manufactured { radius, sigma } => {
                Arc::new(SeparableSource::manufactured(coeff, *radius, *sigma)?)
            }
            SourceConfig::Separable {
                center,
                radius,
                sigma,
            } => Arc::new(SeparableSource::separable(*center, *radius, *sigma)?),
            SourceConfig::OddInT { radius, sigma } => {
                Arc::new(SeparableSource::odd_in_t(*radius, *sigma)?)
            }
            SourceConfig::Growth {
                center,
                radius,
                k,
                kappa,
            } => Arc::new(SeparableSource::growth(*center, *radius, *k, *kappa)?),
            SourceConfig::Zero => Arc::new(SeparableSource::zero()),
            SourceConfig::GridFile { path } => {
                #[derive(Deserialize)]
                struct GridFile {
                    grid: Grid2D,
                    values: Vec<Complex64>,
                }
                let text = std::fs::read_to_string(path)?;
                let f: GridFile = serde_json::from_str(&text)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                Arc::new(GridSource::new(
                    path.display().to_string(),
                    f.grid,
                    f.values,
                )?)
            }
        })
    }

    pub fn initial(&self, grid: &Grid2D) -> InitialData {
        match self.initial {
            InitialConfig::Zero => InitialData::Zero,
            InitialConfig::Gaussian { sigma } => InitialData::Samples(
                grid.x
                    .coords()
                    .iter()
                    .map(|&x| Complex64::new((-x * x / (2.0 * sigma * sigma)).exp(), 0.0))
                    .collect(),
            ),
        }
    }
}
