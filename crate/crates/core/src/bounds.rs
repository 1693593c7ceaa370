//! Dimension bounds from the characteristic scale `ε(δ)`, the volume
//! expansion rates `λ₀, λ₁, λ₂` and the (shifted) Bowen roots.
//!
//! With `α` the Bowen root and `ε = ε(δ)`:
//!
//! * box-counting upper bound `U = d + λ₀(1-α)/log ε`
//! * box-counting lower bound `L = d + λ₂(1-α)/log ε`
//! * Hausdorff upper bound `d + λ₀(1-ᾱ)/log ε`, `ᾱ` the root at shift `Σ_lower`
//! * Hausdorff lower bound `d + λ₁(1-α̲)/log ε`, `α̲` the root at shift `Σ_upper`
//!
//! Raw values are always reported next to their `[0, d]` clamps: the lower
//! bounds are frequently negative (vacuous) for strongly non-conformal systems.

use serde::Serialize;
use thiserror::Error;

use crate::bowen::{self, BowenError};
use crate::ifs::DerivativeStats;

/// Tolerance used for every internal Bowen solve.
const ROOT_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("rho = {rho} must lie in [0, inf Jf = {inf_jf})")]
    RhoTooLarge { rho: f64, inf_jf: f64 },
    #[error("border gap is zero: N0 is undefined when the border condition fails")]
    GapZero,
    #[error("border gap {0} must lie in (0, 1)")]
    InvalidGap(f64),
    #[error("scale ratio ε/‖Dg‖ = {0} must lie in (0, 1)")]
    DegenerateScale(f64),
    #[error("box dimension estimate {value} must lie in (0, {dim}]")]
    InvalidBoxDim { value: f64, dim: usize },
    #[error("system is conformal: no δ₀ with ‖Df‖·ε(δ) < 1 on an initial interval is guaranteed")]
    Conformal,
    #[error("no δ > 0 with ‖Df‖·ε(δ) < 1 near zero")]
    NoAdmissibleDelta,
    #[error("target {target} outside the admissible interval [{lo}, {hi}]")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },
    #[error("upper shift must be positive, got {0}")]
    InvalidShiftRange(f64),
    #[error("dimension curve not strictly decreasing at t = {0}")]
    NotMonotone(f64),
    #[error(transparent)]
    Bowen(#[from] BowenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub delta: f64,
    pub rho: f64,
    /// Box-counting dimension estimate used for the Σ interval.
    pub boxdim_estimate: Option<f64>,
}

impl BoundParams {
    pub fn new(delta: f64, rho: f64) -> Self {
        BoundParams {
            delta,
            rho,
            boxdim_estimate: None,
        }
    }

    pub fn with_boxdim(mut self, boxdim: f64) -> Self {
        self.boxdim_estimate = Some(boxdim);
        self
    }

    /// `δ = min(0.1, δ₁/2)` (0.1 when δ₁ is unavailable) and
    /// `ρ = min(0.1, inf Jf/10)`.
    pub fn defaults(stats: &DerivativeStats, boxdim_estimate: Option<f64>) -> Self {
        let delta = match delta_thresholds(stats, boxdim_estimate.unwrap_or(stats.dim as f64)) {
            Ok(th) if th.delta1 > 0.0 => (0.5 * th.delta1).min(0.1),
            _ => 0.1,
        };
        BoundParams {
            delta,
            rho: (stats.inf_jf / 10.0).min(0.1),
            boxdim_estimate,
        }
    }
}

/// `ε(δ) = (1-δ)·(‖Jg‖_min / ‖Dg‖^{d-1+δ})^{1/(1-δ)}`.
pub fn epsilon_scale(stats: &DerivativeStats, delta: f64) -> Result<f64, BoundsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundsError::InvalidDelta(delta));
    }
    Ok(epsilon_unchecked(stats, delta))
}

fn epsilon_unchecked(stats: &DerivativeStats, delta: f64) -> f64 {
    let d = stats.dim as f64;
    let log_ratio = stats.min_jg.ln() - (d - 1.0 + delta) * stats.norm_dg.ln();
    (1.0 - delta) * (log_ratio / (1.0 - delta)).exp()
}

/// `N₀ = log(ρ₀/2) / log(ε/‖Dg‖)`, returned as a real threshold.
pub fn n_zero(stats: &DerivativeStats, epsilon: f64, rho0: f64) -> Result<f64, BoundsError> {
    if rho0 == 0.0 {
        return Err(BoundsError::GapZero);
    }
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(BoundsError::InvalidGap(rho0));
    }
    let ratio = epsilon / stats.norm_dg;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(BoundsError::DegenerateScale(ratio));
    }
    Ok((0.5 * rho0).ln() / ratio.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lambdas {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// `λ₀ = log(inf Jf - ρ)`, `λ₁ = log(sup Jf + ρ)`, `λ₂ = λ₁·log ε / log ‖Dg‖`.
pub fn lambdas(stats: &DerivativeStats, epsilon: f64, rho: f64) -> Result<Lambdas, BoundsError> {
    if !(rho >= 0.0 && rho < stats.inf_jf) {
        return Err(BoundsError::RhoTooLarge {
            rho,
            inf_jf: stats.inf_jf,
        });
    }
    let lambda1 = (stats.sup_jf + rho).ln();
    Ok(Lambdas {
        lambda0: (stats.inf_jf - rho).ln(),
        lambda1,
        lambda2: lambda1 * epsilon.ln() / stats.norm_dg.ln(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub lower_clamped: f64,
    pub upper_clamped: f64,
    /// Raw lower bound at or below zero: it says nothing.
    pub lower_vacuous: bool,
    /// Raw upper bound at or above `d`: it says nothing.
    pub upper_vacuous: bool,
}

impl BoundPair {
    fn new(lower: f64, upper: f64, dim: usize) -> Self {
        let d = dim as f64;
        BoundPair {
            lower,
            upper,
            lower_clamped: lower.clamp(0.0, d),
            upper_clamped: upper.clamp(0.0, d),
            lower_vacuous: lower <= 0.0,
            upper_vacuous: upper >= d,
        }
    }
}

/// Scale and rates shared by every bound formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Setup {
    pub epsilon: f64,
    pub log_epsilon: f64,
    pub lambdas: Lambdas,
}

impl Setup {
    pub fn new(stats: &DerivativeStats, params: &BoundParams) -> Result<Self, BoundsError> {
        let epsilon = epsilon_scale(stats, params.delta)?;
        Ok(Setup {
            epsilon,
            log_epsilon: epsilon.ln(),
            lambdas: lambdas(stats, epsilon, params.rho)?,
        })
    }

    /// `d + rate·(1-α)/log ε`.
    fn bound(&self, dim: usize, rate: f64, alpha: f64) -> f64 {
        dim as f64 + rate * (1.0 - alpha) / self.log_epsilon
    }
}

/// Box-counting bounds from the Bowen root at `t = 0`.
pub fn box_bounds(stats: &DerivativeStats, params: &BoundParams) -> Result<BoundPair, BoundsError> {
    let setup = Setup::new(stats, params)?;
    let alpha = bowen::solve_bowen(stats, 0.0, ROOT_TOL)?.alpha;
    Ok(box_bounds_with(stats, &setup, alpha))
}

fn box_bounds_with(stats: &DerivativeStats, setup: &Setup, alpha: f64) -> BoundPair {
    BoundPair::new(
        setup.bound(stats.dim, setup.lambdas.lambda2, alpha),
        setup.bound(stats.dim, setup.lambdas.lambda0, alpha),
        stats.dim,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaInterval {
    pub lower: f64,
    pub upper: f64,
    /// `lower <= 0`: δ lies outside the regime where the lower end is positive.
    pub lower_nonpositive: bool,
}

/// Closed-form endpoints for the decay rate Σ(x):
///
/// `lower = log(inf Jf · ε^{d_H + δ - d})`,
/// `upper = log(sup Jf / ((‖Df‖ε)^{-(d_B - δ)} · ε^d))`.
///
/// `hausdim_estimate` (the dimension in the lower end) defaults to `boxdim`.
pub fn sigma_interval(
    stats: &DerivativeStats,
    epsilon: f64,
    delta: f64,
    boxdim: f64,
    hausdim_estimate: Option<f64>,
) -> Result<SigmaInterval, BoundsError> {
    let d = stats.dim as f64;
    if !(boxdim > 0.0 && boxdim <= d) {
        return Err(BoundsError::InvalidBoxDim {
            value: boxdim,
            dim: stats.dim,
        });
    }
    let hausdim = hausdim_estimate.unwrap_or(boxdim);
    let log_eps = epsilon.ln();
    let lower = stats.inf_jf.ln() + (hausdim + delta - d) * log_eps;
    let upper = stats.sup_jf.ln() + (boxdim - delta) * (stats.norm_df * epsilon).ln() - d * log_eps;
    Ok(SigmaInterval {
        lower,
        upper,
        lower_nonpositive: lower <= 0.0,
    })
}

/// Caller-supplied Σ values replacing the closed-form endpoints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SigmaOverrides {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl SigmaOverrides {
    pub fn both(sigma: f64) -> Self {
        SigmaOverrides {
            lower: Some(sigma),
            upper: Some(sigma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HausdorffBounds {
    pub bounds: BoundPair,
    /// Root at shift `sigma_lower_used`; enters the upper bound.
    pub alpha_bar: f64,
    /// Root at shift `sigma_upper_used`; enters the lower bound.
    pub alpha_underbar: f64,
    pub sigma_lower_used: f64,
    pub sigma_upper_used: f64,
}

/// Box dimension used for the Σ interval: the estimate in `params`, or the
/// clamped box-counting upper bound.
pub fn boxdim_for_sigma(stats: &DerivativeStats, params: &BoundParams) -> Result<f64, BoundsError> {
    match params.boxdim_estimate {
        Some(b) => Ok(b),
        None => Ok(box_bounds(stats, params)?.upper_clamped),
    }
}

/// Hausdorff bounds from the shifted Bowen roots. Σ inputs below zero are
/// raised to zero, Σ being non-negative by construction.
pub fn hausdorff_bounds(
    stats: &DerivativeStats,
    params: &BoundParams,
    overrides: SigmaOverrides,
) -> Result<HausdorffBounds, BoundsError> {
    let setup = Setup::new(stats, params)?;
    let (lower, upper) = match (overrides.lower, overrides.upper) {
        (Some(l), Some(u)) => (l, u),
        (l, u) => {
            let boxdim = boxdim_for_sigma(stats, params)?;
            let interval = sigma_interval(stats, setup.epsilon, params.delta, boxdim, None)?;
            (l.unwrap_or(interval.lower), u.unwrap_or(interval.upper))
        }
    };
    let sigma_lower_used = lower.max(0.0);
    let sigma_upper_used = upper.max(0.0);
    let alpha_bar = bowen::solve_bowen(stats, sigma_lower_used, ROOT_TOL)?.alpha;
    let alpha_underbar = bowen::solve_bowen(stats, sigma_upper_used, ROOT_TOL)?.alpha;
    Ok(HausdorffBounds {
        bounds: BoundPair::new(
            setup.bound(stats.dim, setup.lambdas.lambda1, alpha_underbar),
            setup.bound(stats.dim, setup.lambdas.lambda0, alpha_bar),
            stats.dim,
        ),
        alpha_bar,
        alpha_underbar,
        sigma_lower_used,
        sigma_upper_used,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub alpha: f64,
    pub dimension: f64,
}

/// `D(t) = d + λ₁(1-α(t))/log ε` over an ascending grid.
pub fn dimension_curve(stats: &DerivativeStats, params: &BoundParams, t_grid: &[f64]) -> Result<Vec<CurvePoint>, BoundsError> {
    let setup = Setup::new(stats, params)?;
    let roots = bowen::alpha_curve(stats, t_grid, ROOT_TOL)?;
    let curve: Vec<CurvePoint> = roots
        .iter()
        .map(|r| CurvePoint {
            t: r.t,
            alpha: r.alpha,
            dimension: setup.bound(stats.dim, setup.lambdas.lambda1, r.alpha),
        })
        .collect();
    if let Some(w) = curve.windows(2).find(|w| !(w[1].dimension < w[0].dimension)) {
        return Err(BoundsError::NotMonotone(w[1].t));
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    pub sigma: f64,
    pub dimension: f64,
    /// `|D(Σ) - target|`.
    pub residual: f64,
    /// `[D(Σ_max), D(0)]`.
    pub admissible: (f64, f64),
    pub sigma_max: f64,
}

/// Finds the unique Σ in `[0, Σ_max]` with `D(Σ) = target`.
///
/// `Σ_max` defaults to the upper end of the Σ interval.
pub fn invert_dimension(
    stats: &DerivativeStats,
    params: &BoundParams,
    target: f64,
    sigma_max: Option<f64>,
    tol: f64,
) -> Result<Inversion, BoundsError> {
    let setup = Setup::new(stats, params)?;
    let sigma_max = match sigma_max {
        Some(s) => s,
        None => {
            let boxdim = boxdim_for_sigma(stats, params)?;
            sigma_interval(stats, setup.epsilon, params.delta, boxdim, None)?.upper
        }
    };
    if !(sigma_max > 0.0) {
        return Err(BoundsError::InvalidShiftRange(sigma_max));
    }
    let curve = |t: f64| -> Result<f64, BoundsError> {
        let alpha = bowen::solve_bowen(stats, t, ROOT_TOL)?.alpha;
        Ok(setup.bound(stats.dim, setup.lambdas.lambda1, alpha))
    };
    let d_top = curve(0.0)?;
    let d_bottom = curve(sigma_max)?;
    if !(target <= d_top + tol && target >= d_bottom - tol) {
        return Err(BoundsError::TargetOutOfRange {
            target,
            lo: d_bottom,
            hi: d_top,
        });
    }
    let finish = |sigma: f64, dimension: f64| Inversion {
        sigma,
        dimension,
        residual: (dimension - target).abs(),
        admissible: (d_bottom, d_top),
        sigma_max,
    };
    if (d_top - target).abs() <= tol {
        return Ok(finish(0.0, d_top));
    }
    if (d_bottom - target).abs() <= tol {
        return Ok(finish(sigma_max, d_bottom));
    }
    let (mut lo, mut hi) = (0.0, sigma_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = curve(mid)?;
        if (value - target).abs() <= tol && hi - lo <= tol {
            return Ok(finish(mid, value));
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    Ok(finish(mid, curve(mid)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaThresholds {
    /// Every δ in `(0, δ₀)` has `‖Df‖·ε(δ) < 1`; 1 when no failure was found.
    pub delta0: f64,
    /// Every δ in `(0, δ₁)` also has a positive lower Σ endpoint; 0 when
    /// that regime is empty.
    pub delta1: f64,
}

/// `δ₀` and `δ₁` as suprema of initial intervals, located by a grid scan
/// refined with bisection (no monotonicity assumed).
pub fn delta_thresholds(stats: &DerivativeStats, boxdim: f64) -> Result<DeltaThresholds, BoundsError> {
    if stats.is_conformal() {
        return Err(BoundsError::Conformal);
    }
    let d = stats.dim as f64;
    if !(boxdim > 0.0 && boxdim <= d) {
        return Err(BoundsError::InvalidBoxDim {
            value: boxdim,
            dim: stats.dim,
        });
    }
    let delta0 = initial_interval_sup(|delta| stats.norm_df * epsilon_unchecked(stats, delta) < 1.0, 1.0);
    if delta0 == 0.0 {
        return Err(BoundsError::NoAdmissibleDelta);
    }
    let delta1 = initial_interval_sup(
        |delta| {
            let eps = epsilon_unchecked(stats, delta);
            stats.inf_jf.ln() + (boxdim + delta - d) * eps.ln() > 0.0
        },
        delta0,
    );
    Ok(DeltaThresholds { delta0, delta1 })
}

fn initial_interval_sup(holds: impl Fn(f64) -> bool, upper: f64) -> f64 {
    const GRID: usize = 1000;
    let mut good = upper * 1e-6;
    if !holds(good) {
        return 0.0;
    }
    for k in 1..GRID {
        let delta = upper * k as f64 / GRID as f64;
        if delta <= good {
            continue;
        }
        if holds(delta) {
            good = delta;
            continue;
        }
        let (mut lo, mut hi) = (good, delta);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    upper
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{derivative_stats, SystemSpec};
    use approx::assert_relative_eq;

    fn two_corner() -> DerivativeStats {
        derivative_stats(&SystemSpec::two_corner(0.77, 0.35)).unwrap()
    }

    fn example_params() -> BoundParams {
        BoundParams::new(0.1, 0.1).with_boxdim(1.5)
    }

    #[test]
    fn epsilon_examples() {
        let stats = two_corner();
        assert_relative_eq!(epsilon_scale(&stats, 0.1).unwrap(), 0.28857824589567116, epsilon = 1e-14);
        assert_relative_eq!(epsilon_scale(&stats, 0.5).unwrap(), 0.07954545454545454, epsilon = 1e-14);
        let diag = SystemSpec::new(vec![
            crate::ifs::AffineBranch::diagonal(&[1.0 / 3.0, 1.0 / 3.0], &[0.0, 0.0]),
            crate::ifs::AffineBranch::diagonal(&[1.0 / 3.0, 1.0 / 3.0], &[2.0 / 3.0, 2.0 / 3.0]),
        ])
        .unwrap();
        let conformal = derivative_stats(&diag).unwrap();
        assert_relative_eq!(epsilon_scale(&conformal, 1e-9).unwrap(), 1.0 / 3.0, epsilon = 1e-8);
        assert!(epsilon_scale(&conformal, 1e-9).unwrap() < conformal.norm_dg);
        assert_eq!(epsilon_scale(&stats, 1.0), Err(BoundsError::InvalidDelta(1.0)));
    }

    #[test]
    fn n_zero_examples() {
        let stats = two_corner();
        let eps = epsilon_scale(&stats, 0.1).unwrap();
        assert_relative_eq!(n_zero(&stats, eps, 0.05).unwrap(), 3.7587001303305385, epsilon = 1e-12);
        assert_eq!(n_zero(&stats, eps, 0.0), Err(BoundsError::GapZero));
        assert_eq!(n_zero(&stats, eps, 2.0), Err(BoundsError::InvalidGap(2.0)));
        assert!(matches!(n_zero(&stats, stats.norm_dg, 0.05), Err(BoundsError::DegenerateScale(_))));
    }

    #[test]
    fn lambda_examples() {
        let stats = two_corner();
        let eps = epsilon_scale(&stats, 0.1).unwrap();
        let l = lambdas(&stats, eps, 0.1).unwrap();
        assert_relative_eq!(l.lambda0, 1.2838670779781223, epsilon = 1e-13);
        assert_relative_eq!(l.lambda1, 1.3377801329026059, epsilon = 1e-13);
        assert_relative_eq!(l.lambda2, 6.361142280202291, epsilon = 1e-12);

        let dust = derivative_stats(&SystemSpec::cantor_dust()).unwrap();
        let l = lambdas(&dust, 0.3, 0.0).unwrap();
        assert_relative_eq!(l.lambda0, 9f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(l.lambda1, 9f64.ln(), epsilon = 1e-14);
        let l = lambdas(&stats, stats.norm_dg, 0.1).unwrap();
        assert_relative_eq!(l.lambda2, l.lambda1, epsilon = 1e-15);
        assert!(matches!(lambdas(&stats, eps, 4.0), Err(BoundsError::RhoTooLarge { .. })));
    }

    #[test]
    fn box_bound_examples() {
        let stats = two_corner();
        let b = box_bounds(&stats, &example_params()).unwrap();
        assert_relative_eq!(b.upper, 1.5130611362566477, epsilon = 1e-10);
        assert!((b.upper - 1.5131).abs() < 1e-4);
        assert_relative_eq!(b.lower, -0.41262311898325941, epsilon = 1e-9);
        assert_eq!(b.lower_clamped, 0.0);
        assert!(b.lower_vacuous);
        assert!(!b.upper_vacuous);
    }

    #[test]
    fn conformal_limit_of_box_upper() {
        let tiny = BoundParams::new(1e-6, 1e-6);
        let dust = derivative_stats(&SystemSpec::cantor_dust()).unwrap();
        let u = box_bounds(&dust, &tiny).unwrap().upper;
        assert!((u - 2.0 * 2f64.ln() / 3f64.ln()).abs() < 1e-5, "{u}");
        // two diagonal branches: the attractor is a diagonal Cantor set
        let diag = SystemSpec::new(vec![
            crate::ifs::AffineBranch::diagonal(&[1.0 / 3.0, 1.0 / 3.0], &[0.0, 0.0]),
            crate::ifs::AffineBranch::diagonal(&[1.0 / 3.0, 1.0 / 3.0], &[2.0 / 3.0, 2.0 / 3.0]),
        ])
        .unwrap();
        let u = box_bounds(&derivative_stats(&diag).unwrap(), &tiny).unwrap().upper;
        assert!((u - 2f64.ln() / 3f64.ln()).abs() < 1e-5, "{u}");
    }

    #[test]
    fn sigma_interval_examples() {
        let stats = two_corner();
        let eps = epsilon_scale(&stats, 0.1).unwrap();
        let s = sigma_interval(&stats, eps, 0.1, 1.5, None).unwrap();
        assert_relative_eq!(s.upper, 3.526611271049421, epsilon = 1e-12);
        assert_relative_eq!(s.lower, 1.8083024940452099, epsilon = 1e-12);
        assert!(s.lower < s.upper);
        assert!(!s.lower_nonpositive);

        let dust = derivative_stats(&SystemSpec::cantor_dust()).unwrap();
        let eps = epsilon_scale(&dust, 1e-9).unwrap();
        let dim = 2.0 * 2f64.ln() / 3f64.ln();
        let s = sigma_interval(&dust, eps, 1e-9, dim, None).unwrap();
        assert_relative_eq!(s.lower, 3.0081547935525483, epsilon = 1e-7);
        assert!(sigma_interval(&dust, eps, 0.1, 2.5, None).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let stats = two_corner();
        let p = example_params();
        let h = hausdorff_bounds(&stats, &p, SigmaOverrides::both(0.5)).unwrap();
        assert_relative_eq!(h.bounds.lower, 1.3355209402874014, epsilon = 1e-10);
        let h0 = hausdorff_bounds(&stats, &p, SigmaOverrides::both(0.0)).unwrap();
        assert_relative_eq!(h0.bounds.upper, 1.5130611362566477, epsilon = 1e-10);
        assert_relative_eq!(h0.bounds.upper, box_bounds(&stats, &p).unwrap().upper, epsilon = 1e-14);

        let tiny = BoundParams::new(1e-6, 1e-6);
        let collapse = hausdorff_bounds(&stats, &tiny, SigmaOverrides::both(0.0)).unwrap();
        let reference = (2.0 * 0.77f64 / 0.35).ln() / (1.0f64 / 0.35).ln();
        assert!((collapse.bounds.lower - reference).abs() < 1e-6);

        let defaults = hausdorff_bounds(&stats, &p, SigmaOverrides::default()).unwrap();
        assert_relative_eq!(defaults.sigma_lower_used, 1.8083024940452099, epsilon = 1e-12);
        assert_relative_eq!(defaults.sigma_upper_used, 3.526611271049421, epsilon = 1e-12);
        let b = box_bounds(&stats, &p).unwrap();
        assert!(defaults.bounds.lower_clamped <= defaults.bounds.upper_clamped);
        assert!(defaults.bounds.upper_clamped <= b.upper_clamped + 1e-9);
    }

    #[test]
    fn degenerate_collapse_rho_zero() {
        let stats = two_corner();
        let p = BoundParams::new(0.1, 0.0);
        let h = hausdorff_bounds(&stats, &p, SigmaOverrides::both(0.0)).unwrap();
        assert_eq!(h.bounds.upper, box_bounds(&stats, &p).unwrap().upper);
    }

    #[test]
    fn curve_and_inversion() {
        let stats = two_corner();
        let p = example_params();
        let c = dimension_curve(&stats, &p, &[0.0, 0.5]).unwrap();
        assert_relative_eq!(c[0].dimension, 1.4926132548862459, epsilon = 1e-10);
        assert_relative_eq!(c[1].dimension, 1.3355209402874014, epsilon = 1e-10);

        let inv = invert_dimension(&stats, &p, 1.3355209402874014, None, 1e-12).unwrap();
        assert!((inv.sigma - 0.5).abs() < 1e-8, "{inv:?}");
        let top = invert_dimension(&stats, &p, c[0].dimension, None, 1e-12).unwrap();
        assert_eq!(top.sigma, 0.0);
        assert!(matches!(
            invert_dimension(&stats, &p, 1.6, None, 1e-12),
            Err(BoundsError::TargetOutOfRange { .. })
        ));
        let mid = invert_dimension(&stats, &p, 1.4113, None, 1e-12).unwrap();
        assert!(mid.sigma > 0.0 && mid.sigma < 0.5);
    }

    #[test]
    fn curve_rejects_shifts_below_threshold() {
        let stats = two_corner();
        let threshold = bowen::expansion_threshold(&stats);
        assert!(dimension_curve(&stats, &example_params(), &[threshold + 1e-6]).is_ok());
        assert!(matches!(
            dimension_curve(&stats, &example_params(), &[threshold - 1e-6]),
            Err(BoundsError::Bowen(BowenError::NotExpanding { .. }))
        ));
    }

    #[test]
    fn delta_threshold_examples() {
        let stats = two_corner();
        let eps = epsilon_scale(&stats, 0.1).unwrap();
        assert_relative_eq!(stats.norm_df * eps, 0.8245092739876319, epsilon = 1e-12);
        let th = delta_thresholds(&stats, 1.5).unwrap();
        assert!(th.delta0 > 0.1);
        assert!(th.delta1 > 0.1 && th.delta1 <= th.delta0);
        let d = BoundParams::defaults(&stats, Some(1.5));
        assert_eq!(d.delta, 0.1);
        assert_eq!(d.rho, 0.1);

        let dust = derivative_stats(&SystemSpec::cantor_dust()).unwrap();
        assert_eq!(delta_thresholds(&dust, 1.26), Err(BoundsError::Conformal));

        let skew = DerivativeStats::from_singular_values(2, vec![vec![0.9, 0.1], vec![0.9, 0.1]]).unwrap();
        let th = delta_thresholds(&skew, 1.0).unwrap();
        assert!(th.delta0 > 0.5);
    }
}
