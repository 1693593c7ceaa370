//! Roots of the Bowen equation `P(s, t) = 0` and of its shifted variant.
//!
//! `s ↦ P(s, t)` is strictly decreasing whenever `e^t·inf Jf > 1`, with
//! `P(0, t) = log(#branches) > 0`, so plain bisection on a doubled bracket
//! always converges.

use serde::Serialize;
use thiserror::Error;

use crate::ifs::DerivativeStats;
use crate::thermo::{self, PotentialParams};

/// Default residual tolerance on `|P|`.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_DOUBLINGS: u32 = 64;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BowenError {
    #[error("shift t = {t} is not volume expanding (need t > {threshold})")]
    NotExpanding { t: f64, threshold: f64 },
    #[error("pressure did not change sign within 2^{MAX_DOUBLINGS} at t = {t}")]
    NoBracket { t: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("residual {residual:.3e} above tolerance {tol:.3e} at t = {t}")]
    ToleranceNotReached { t: f64, residual: f64, tol: f64 },
    #[error("t grid must be strictly ascending (at index {index})")]
    NotAscending { index: usize },
    #[error("root curve not strictly decreasing at t = {t}")]
    NotMonotone { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BowenRoot {
    pub alpha: f64,
    pub t: f64,
    /// `|P(alpha, t)|`.
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest admissible shift: the precondition `e^t·inf Jf > 1` reads
/// `t > -log inf Jf`.
pub fn expansion_threshold(stats: &DerivativeStats) -> f64 {
    -stats.inf_jf.ln()
}

/// Solves `log Σ_i Jg_i^s - s·t = 0` by bisection.
pub fn solve_bowen(stats: &DerivativeStats, t: f64, tol: f64) -> Result<BowenRoot, BowenError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(BowenError::InvalidTolerance(tol));
    }
    let threshold = expansion_threshold(stats);
    if !(t > threshold) || !t.is_finite() {
        return Err(BowenError::NotExpanding { t, threshold });
    }
    let pressure = |s: f64| thermo::closed_form(&stats.per_branch_jacobian, PotentialParams::new(s, t));

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while pressure(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(BowenError::NoBracket { t });
        }
    }

    let mut iterations = 0;
    let (alpha, residual) = loop {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let p = pressure(mid);
        if p == 0.0 || (p.abs() <= tol && hi - lo <= tol) {
            break (mid, p.abs());
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if iterations >= MAX_ITERATIONS || hi - lo <= f64::EPSILON * hi {
            let mid = 0.5 * (lo + hi);
            break (mid, pressure(mid).abs());
        }
    };
    if residual > tol {
        return Err(BowenError::ToleranceNotReached { t, residual, tol });
    }
    Ok(BowenRoot {
        alpha,
        t,
        residual,
        iterations,
    })
}

/// Closed form `log(#branches)/(t - log Jg)` when every branch has the same
/// Jacobian `Jg`; `None` otherwise.
pub fn equal_branch_root(stats: &DerivativeStats, t: f64) -> Option<f64> {
    let jac = &stats.per_branch_jacobian;
    let first = jac[0];
    if jac.iter().all(|j| (j - first).abs() <= 1e-15 * first) {
        Some((jac.len() as f64).ln() / (t - first.ln()))
    } else {
        None
    }
}

/// Roots along an ascending grid of shifts; the curve must decrease strictly.
pub fn alpha_curve(stats: &DerivativeStats, t_grid: &[f64], tol: f64) -> Result<Vec<BowenRoot>, BowenError> {
    if let Some(index) = t_grid.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(BowenError::NotAscending { index: index + 1 });
    }
    let roots = t_grid
        .iter()
        .map(|&t| solve_bowen(stats, t, tol))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(w) = roots.windows(2).find(|w| !(w[1].alpha < w[0].alpha)) {
        return Err(BowenError::NotMonotone { t: w[1].t });
    }
    Ok(roots)
}

/// `α'(t) = -α(t) / ∫ log(e^t·Jf) dμ_t` by the implicit function theorem.
pub fn alpha_prime(stats: &DerivativeStats, t: f64, tol: f64) -> Result<f64, BowenError> {
    let root = solve_bowen(stats, t, tol)?;
    let chi = thermo::lyapunov_volume(stats, PotentialParams::new(root.alpha, t));
    Ok(-root.alpha / chi)
}
