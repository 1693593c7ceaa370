use std::fs;
use std::path::{Path, PathBuf};

use ncbounds::attractor::{dyadic_scales, CloudMode};
use ncbounds::bounds::SigmaOverrides;
use ncbounds::ifs::SystemSpec;
use ncbounds::pipeline::AnalysisOptions;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub boxdim_estimate: Option<f64>,
    pub sigma_lower: Option<f64>,
    pub sigma_upper: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.t_max
                } else {
                    self.t_min + (self.t_max - self.t_min) * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    Deterministic,
    ChaosGame,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub mode: EstimatorMode,
    pub depth: Option<usize>,
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub drop_coarse: bool,
}

impl EstimatorConfig {
    pub fn cloud_mode(&self) -> Result<CloudMode, CliError> {
        match self.mode {
            EstimatorMode::Deterministic => self
                .depth
                .map(|depth| CloudMode::DeterministicCylinders { depth })
                .ok_or_else(|| CliError::Usage("deterministic estimator needs `depth`".into())),
            EstimatorMode::ChaosGame => self
                .samples
                .map(|samples| CloudMode::ChaosGame {
                    samples,
                    seed: self.seed,
                })
                .ok_or_else(|| CliError::Usage("chaos_game estimator needs `samples`".into())),
        }
    }

    /// Defaults to `2^-3 … 2^-10`.
    pub fn scales(&self) -> Vec<f64> {
        self.scales.clone().unwrap_or_else(|| dyadic_scales(3, 10))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: serde_json::Value,
    #[serde(default)]
    params: ParamsConfig,
    sweep: Option<SweepConfig>,
    estimator: Option<EstimatorConfig>,
    #[serde(default)]
    output: OutputConfig,
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub system: SystemSpec,
    pub params: ParamsConfig,
    pub sweep: Option<SweepConfig>,
    pub estimator: Option<EstimatorConfig>,
    pub output: OutputConfig,
}

impl JobConfig {
    /// Malformed JSON is a usage error; a well-formed but invalid system is
    /// a validation error.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        let system: SystemSpec =
            serde_json::from_value(raw.system).map_err(|e| CliError::Validation(vec![format!("system: {e}")]))?;
        if let Some(sweep) = &raw.sweep {
            if sweep.steps < 2 {
                return Err(CliError::Usage(format!("sweep.steps must be at least 2, got {}", sweep.steps)));
            }
            if !(sweep.t_min < sweep.t_max) {
                return Err(CliError::Usage("sweep.t_min must be below sweep.t_max".into()));
            }
        }
        Ok(JobConfig {
            system,
            params: raw.params,
            sweep: raw.sweep,
            estimator: raw.estimator,
            output: raw.output,
        })
    }

    pub fn options(&self, sigma_override: Option<f64>) -> AnalysisOptions {
        let sigma = match sigma_override {
            Some(s) => SigmaOverrides::both(s),
            None => SigmaOverrides {
                lower: self.params.sigma_lower,
                upper: self.params.sigma_upper,
            },
        };
        AnalysisOptions {
            delta: self.params.delta,
            rho: self.params.rho,
            boxdim_estimate: self.params.boxdim_estimate,
            sigma,
        }
    }
}
