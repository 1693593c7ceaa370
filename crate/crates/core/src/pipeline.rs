//! End-to-end analysis of one system.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{
    self, BoundPair, BoundParams, BoundsError, DeltaThresholds, HausdorffBounds, Lambdas, SigmaInterval,
    SigmaOverrides,
};
use crate::bowen::{self, BowenError};
use crate::ifs::{self, DerivativeStats, IfsError, SystemSpec, ValidationReport, Violation};

/// Tolerance for the reported Bowen root.
const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Invalid(#[from] IfsError),
    #[error("system violates the open condition: {}", list(.0))]
    Violations(Vec<Violation>),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

impl From<BowenError> for PipelineError {
    fn from(e: BowenError) -> Self {
        PipelineError::Bounds(BoundsError::Bowen(e))
    }
}

impl PipelineError {
    /// Validation failures as opposed to numeric or domain failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, PipelineError::Bounds(_))
    }
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// User choices; anything left `None` gets the documented default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AnalysisOptions {
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub boxdim_estimate: Option<f64>,
    pub sigma: SigmaOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub system: SystemSpec,
    pub validation: ValidationReport,
    pub stats: DerivativeStats,
    pub conformal: bool,
    pub delta_thresholds: Option<DeltaThresholds>,
    pub params: BoundParams,
    pub epsilon: f64,
    pub log_epsilon: f64,
    pub n0: Option<f64>,
    pub lambdas: Lambdas,
    pub alpha0: f64,
    pub box_bounds: BoundPair,
    /// Box dimension fed into the Σ interval.
    pub sigma_boxdim: Option<f64>,
    pub sigma_interval: Option<SigmaInterval>,
    pub sigma_overrides: SigmaOverrides,
    pub hausdorff: Option<HausdorffBounds>,
    pub warnings: Vec<String>,
}

pub fn analyze(spec: &SystemSpec, options: &AnalysisOptions) -> Result<AnalysisReport, PipelineError> {
    let validation = ifs::validate(spec)?;
    let open: Vec<Violation> = validation
        .violations
        .iter()
        .filter(|v| matches!(v, Violation::OpenCondition { .. }))
        .cloned()
        .collect();
    if !open.is_empty() {
        return Err(PipelineError::Violations(open));
    }
    let mut warnings: Vec<String> = validation.violations.iter().map(ToString::to_string).collect();
    if validation.volume_reducible_suspect {
        warnings.push("attractor may be volume reducible (lies in a proper affine subspace)".into());
    }

    let stats = ifs::derivative_stats(spec)?;
    let d = stats.dim as f64;
    let thresholds = match bounds::delta_thresholds(&stats, options.boxdim_estimate.unwrap_or(d)) {
        Ok(th) => Some(th),
        Err(BoundsError::Conformal) => {
            warnings.push("conformal system: delta thresholds do not exist, Σ interval skipped".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let conformal = thresholds.is_none();

    let defaults = BoundParams::defaults(&stats, options.boxdim_estimate);
    let params = BoundParams {
        delta: options.delta.unwrap_or(defaults.delta),
        rho: options.rho.unwrap_or(defaults.rho),
        boxdim_estimate: options.boxdim_estimate,
    };
    if let Some(th) = thresholds {
        if !(params.delta < th.delta1) {
            warnings.push(format!(
                "delta = {} is outside (0, delta1 = {:.6}); the Σ interval may be invalid",
                params.delta, th.delta1
            ));
        }
    }

    let setup = bounds::Setup::new(&stats, &params)?;
    let n0 = match bounds::n_zero(&stats, setup.epsilon, validation.border_gap) {
        Ok(n) => Some(n),
        Err(BoundsError::GapZero) => {
            warnings.push("border gap is zero: N0 undefined".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let alpha0 = bowen::solve_bowen(&stats, 0.0, ROOT_TOL)?.alpha;
    let box_bounds = bounds::box_bounds(&stats, &params)?;
    if box_bounds.lower_vacuous {
        warnings.push(format!("box lower bound {:.6} is vacuous", box_bounds.lower));
    }

    let (sigma_boxdim, sigma_interval) = if conformal {
        (None, None)
    } else {
        let boxdim = bounds::boxdim_for_sigma(&stats, &params)?;
        let interval = bounds::sigma_interval(&stats, setup.epsilon, params.delta, boxdim, None)?;
        if interval.lower_nonpositive {
            warnings.push(format!(
                "Σ lower endpoint {:.6} is not positive: delta exceeds the valid regime",
                interval.lower
            ));
        }
        (Some(boxdim), Some(interval))
    };
    let overrides = options.sigma;
    let hausdorff = match (sigma_interval, overrides.lower.zip(overrides.upper)) {
        (Some(interval), _) => Some(bounds::hausdorff_bounds(
            &stats,
            &params,
            SigmaOverrides {
                lower: overrides.lower.or(Some(interval.lower)),
                upper: overrides.upper.or(Some(interval.upper)),
            },
        )?),
        (None, Some(_)) => Some(bounds::hausdorff_bounds(&stats, &params, overrides)?),
        (None, None) => None,
    };

    Ok(AnalysisReport {
        system: spec.clone(),
        validation,
        conformal,
        delta_thresholds: thresholds,
        params,
        epsilon: setup.epsilon,
        log_epsilon: setup.log_epsilon,
        n0,
        lambdas: setup.lambdas,
        alpha0,
        box_bounds,
        sigma_boxdim,
        sigma_interval,
        sigma_overrides: overrides,
        hausdorff,
        warnings,
        stats,
    })
}
