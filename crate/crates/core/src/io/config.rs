use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::flow::{FlowConfig, KernelSign, SolverOptions};
use crate::measure::{Grid, MeasureSpec, QuantileVector, TargetMeasure};
use crate::{Error, Result};

/// Named experiments with their published parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentPreset {
    DiracToDirac,
    DiracAway,
    UniformToUniform,
    GaussianLike,
    LambdaSweep,
}

impl ExperimentPreset {
    pub const ALL: [ExperimentPreset; 5] = [
        ExperimentPreset::DiracToDirac,
        ExperimentPreset::DiracAway,
        ExperimentPreset::UniformToUniform,
        ExperimentPreset::GaussianLike,
        ExperimentPreset::LambdaSweep,
    ];

    /// `lambda` values of the sweep preset.
    pub const SWEEP_LAMBDAS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentPreset::DiracToDirac => "dirac_to_dirac",
            ExperimentPreset::DiracAway => "dirac_away",
            ExperimentPreset::UniformToUniform => "uniform_to_uniform",
            ExperimentPreset::GaussianLike => "gaussian_like",
            ExperimentPreset::LambdaSweep => "lambda_sweep",
        }
    }

    /// Layer of settings this preset contributes.
    pub fn layer(self) -> ConfigFile {
        let dirac = |at| MeasureSpec::Dirac { at };
        let cut = (1.0 / 1001.0, 1000.0 / 1001.0);
        let gauss = |mean| MeasureSpec::TruncatedGaussian {
            mean,
            stdev: 1.0,
            cut_lo: cut.0,
            cut_hi: cut.1,
        };
        let (tau, lambda, grid, horizon, target, initial, kernel) = match self {
            ExperimentPreset::DiracToDirac => (1e-3, 1e-2, 400, 1.0, dirac(0.0), dirac(-1.0), KernelSign::Negative),
            ExperimentPreset::DiracAway => (1e-3, 1e-2, 100, 1.0, dirac(0.0), dirac(-1.0), KernelSign::Positive),
            ExperimentPreset::UniformToUniform => (
                2e-3,
                1e-2,
                200,
                2.0,
                MeasureSpec::Uniform { a: 0.0, b: 1.0 },
                MeasureSpec::Uniform { a: -3.0, b: -1.0 },
                KernelSign::Negative,
            ),
            ExperimentPreset::GaussianLike => (1e-2, 1e-2, 200, 5.0, gauss(-5.0), gauss(5.0), KernelSign::Negative),
            ExperimentPreset::LambdaSweep => (
                2e-3,
                1e-2,
                200,
                0.5,
                MeasureSpec::Uniform { a: 0.0, b: 1.0 },
                MeasureSpec::Uniform { a: -3.0, b: -1.0 },
                KernelSign::Negative,
            ),
        };
        ConfigFile {
            preset: Some(self),
            tau: Some(tau),
            lambda: Some(lambda),
            grid: Some(grid),
            horizon: Some(horizon),
            kernel: Some(kernel),
            target: Some(target),
            initial: Some(initial),
            ..ConfigFile::default()
        }
    }

    pub fn config(self) -> Result<FlowConfig> {
        self.layer().resolve()
    }
}

impl fmt::Display for ExperimentPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{s}`")))
    }
}

/// A partial configuration as read from a file or from command-line flags.
///
/// Layers are merged with [`ConfigFile::overlay`]; a `preset` supplies every
/// field it names before the explicit fields are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<ExperimentPreset>,
    pub tau: Option<f64>,
    pub lambda: Option<f64>,
    /// Number of grid cells `M`.
    pub grid: Option<usize>,
    pub horizon: Option<f64>,
    pub kernel: Option<KernelSign>,
    pub target: Option<MeasureSpec>,
    /// Initial measure; its quantile is sampled on the grid.
    pub initial: Option<MeasureSpec>,
    pub solver: Option<SolverOptions>,
    pub output_stride: Option<usize>,
    pub checkpoints: Option<usize>,
}

/// Serialization of a [`ConfigFile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Toml,
    Json,
}

impl ConfigFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Ok(ConfigFormat::Toml),
            Some("json") => Ok(ConfigFormat::Json),
            _ => Err(Error::config(
                "path",
                format!("{}: expected a .toml or .json file", path.display()),
            )),
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str, format: ConfigFormat) -> Result<Self> {
        match format {
            ConfigFormat::Toml => toml::from_str(text).map_err(|e| {
                let field = e
                    .span()
                    .and_then(|r| text.get(r))
                    .unwrap_or("")
                    .trim()
                    .to_string();
                Error::config(field, e.message().to_string())
            }),
            ConfigFormat::Json => {
                serde_json::from_str(text).map_err(|e| Error::config("json", e.to_string()))
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let format = ConfigFormat::from_path(path)?;
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, format)
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: ConfigFile) -> ConfigFile {
        ConfigFile {
            preset: top.preset.or(self.preset),
            tau: top.tau.or(self.tau),
            lambda: top.lambda.or(self.lambda),
            grid: top.grid.or(self.grid),
            horizon: top.horizon.or(self.horizon),
            kernel: top.kernel.or(self.kernel),
            target: top.target.or(self.target),
            initial: top.initial.or(self.initial),
            solver: top.solver.or(self.solver),
            output_stride: top.output_stride.or(self.output_stride),
            checkpoints: top.checkpoints.or(self.checkpoints),
        }
    }

    /// Fills defaults (from the preset if any) and validates.
    pub fn resolve(self) -> Result<FlowConfig> {
        let merged = match self.preset {
            Some(p) => p.layer().overlay(self),
            None => self,
        };
        let tau = merged.tau.ok_or_else(|| missing("tau"))?;
        let lambda = merged.lambda.ok_or_else(|| missing("lambda"))?;
        let cells = merged.grid.ok_or_else(|| missing("grid"))?;
        let horizon = merged.horizon.ok_or_else(|| missing("horizon"))?;
        let target_spec = merged.target.ok_or_else(|| missing("target"))?;
        let initial_spec = merged.initial.ok_or_else(|| missing("initial"))?;

        let grid = Grid::new(cells).map_err(|e| Error::config("grid", e.to_string()))?;
        let target = TargetMeasure::try_from(target_spec).map_err(|e| Error::config("target", e.to_string()))?;
        let initial_measure =
            TargetMeasure::try_from(initial_spec).map_err(|e| Error::config("initial", e.to_string()))?;
        let initial: QuantileVector = initial_measure.sample(&grid);

        let cfg = FlowConfig {
            tau,
            lambda,
            horizon,
            target,
            initial,
            kernel: merged.kernel.unwrap_or_default(),
            solver: merged.solver.unwrap_or_default(),
            output_stride: merged.output_stride.unwrap_or(1),
            checkpoints: merged.checkpoints.unwrap_or(6),
        };
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter { field, message } => Error::config(field, message),
            Error::NotMonotone { .. } => Error::config("initial", e.to_string()),
            other => other,
        })?;
        Ok(cfg)
    }
}

fn missing(field: &str) -> Error {
    Error::config(field, "missing (set it or choose a preset)")
}

/// Reads a configuration file (`.toml` or `.json`) and applies `flags` on
/// top of it.
pub fn load_config(path: Option<&Path>, flags: ConfigFile) -> Result<FlowConfig> {
    let base = match path {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    base.overlay(flags).resolve()
}
