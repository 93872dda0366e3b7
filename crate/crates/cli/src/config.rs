//! Experiment configuration: one TOML file drives every subcommand.
//! Unknown keys are rejected; omitted sections fall back to the desk-scale
//! defaults, so a minimal config is just a shape name.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use coco_core::analytic::InterfaceDensity;
use coco_core::designer::{DesignConfig, Optimizer};
use coco_core::error::{Error, Result};
use coco_core::geometry::{shapes, ConformalMap};
use coco_core::training::{LossWeights, Mode, TrainConfig};
use coco_core::colloc;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeSpec {
    /// Library shape name, e.g. "fish" or "ellipse:0.25".
    Name(String),
    /// Inline exterior map coefficients.
    Inline {
        gamma: f64,
        #[serde(default)]
        a0: [f64; 2],
        ak: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySpec {
    File { file: PathBuf },
    Inline {
        p0: f64,
        #[serde(default)]
        pk: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Matrix truncation for analytic solves.
    pub big_n: usize,
    /// Collocation counts (exterior, interior, boundary).
    pub counts: (usize, usize, usize),
    /// Outer radius bound of the exterior annulus.
    pub l: f64,
    /// Boundary offset; omitted means 1e-2 * gamma.
    pub delta: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { big_n: 40, counts: colloc::DESK_COUNTS, l: colloc::DEFAULT_L, delta: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignSection {
    pub order: usize,
    /// Solve truncation; omitted means max(40, 2 * order).
    pub big_n: Option<usize>,
    pub eps_reg: f64,
    pub positivity_weight: f64,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub max_iters: usize,
    pub fd_step: f64,
    pub init_p0: f64,
    pub single_field: bool,
}

impl Default for DesignSection {
    fn default() -> Self {
        let d = DesignConfig::new(8);
        DesignSection {
            order: d.n,
            big_n: None,
            eps_reg: d.eps_reg,
            positivity_weight: d.positivity_weight,
            optimizer: d.optimizer,
            learning_rate: d.learning_rate,
            max_iters: d.max_iters,
            fd_step: d.fd_step,
            init_p0: d.init_p0,
            single_field: d.single_field,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub mode: Mode,
    pub iterations: usize,
    pub lr_pinn: f64,
    pub lr_inv: f64,
    pub eta: f64,
    pub init_p0: f64,
    pub density_order: usize,
    /// Background field H = a*x1 + b*x2.
    pub field: (f64, f64),
    pub weights: LossWeights,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::desk();
        TrainSection {
            mode: t.mode,
            iterations: t.iterations,
            lr_pinn: t.lr_pinn,
            lr_inv: t.lr_inv,
            eta: t.eta,
            init_p0: t.init_p0,
            density_order: t.density_order,
            field: t.field,
            weights: t.weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    /// "consistency" or "stability".
    pub kind: String,
    pub seeds: Vec<u64>,
    /// Contrast values for stability studies.
    pub sigma_c_list: Vec<f64>,
}

impl Default for StudySection {
    fn default() -> Self {
        StudySection { kind: "consistency".into(), seeds: vec![0], sigma_c_list: vec![] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub sigma_c: f64,
    pub sigma_m: f64,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    /// Last scalar-or-table field: inline shapes serialize as a table.
    pub shape: ShapeSpec,
    pub density: Option<DensitySpec>,
    pub solver: SolverSection,
    pub design: DesignSection,
    pub train: TrainSection,
    pub study: StudySection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            shape: ShapeSpec::Name("disk".into()),
            sigma_c: 5.0,
            sigma_m: 1.0,
            seed: 0,
            out_dir: None,
            threads: None,
            density: None,
            solver: SolverSection::default(),
            design: DesignSection::default(),
            train: TrainSection::default(),
            study: StudySection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("config serialize: {e}")))
    }

    pub fn resolve_map(&self) -> Result<ConformalMap> {
        match &self.shape {
            ShapeSpec::Name(name) => shapes::by_name(name),
            ShapeSpec::Inline { gamma, a0, ak } => ConformalMap::new(
                *gamma,
                Complex64::new(a0[0], a0[1]),
                ak.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            ),
        }
    }

    /// Density for `solve`: referenced file or inline coefficients.
    pub fn resolve_density(&self, map: &ConformalMap) -> Result<InterfaceDensity> {
        match &self.density {
            None => Err(Error::Config("solve needs a [density] section (file or p0/pk)".into())),
            Some(DensitySpec::File { file }) => crate::artifacts::read_density(file),
            Some(DensitySpec::Inline { p0, pk }) => InterfaceDensity::new(
                map.gamma(),
                *p0,
                pk.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            ),
        }
    }

    pub fn design_config(&self) -> DesignConfig {
        let d = &self.design;
        DesignConfig {
            n: d.order,
            big_n: d.big_n.unwrap_or_else(|| 40.max(2 * d.order)),
            eps_reg: d.eps_reg,
            positivity_weight: d.positivity_weight,
            optimizer: d.optimizer,
            learning_rate: d.learning_rate,
            max_iters: d.max_iters,
            fd_step: d.fd_step,
            seed: self.seed,
            init_p0: d.init_p0,
            single_field: d.single_field,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            mode: t.mode,
            sigma_c: self.sigma_c,
            sigma_m: self.sigma_m,
            iterations: t.iterations,
            lr_pinn: t.lr_pinn,
            lr_inv: t.lr_inv,
            eta: t.eta,
            seed: self.seed,
            init_p0: t.init_p0,
            weights: t.weights,
            counts: self.solver.counts,
            l: self.solver.l,
            delta: self.solver.delta,
            field: t.field,
            density_order: t.density_order,
        }
    }
}
