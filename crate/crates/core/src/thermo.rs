//! Topological pressure of the geometric potentials `φ_{s,t} = -s·log(e^t·Jf)`.
//!
//! For affine branches the Jacobian of the expanding map is constant on each
//! branch, so the cylinder sum over words of length `n` factorises:
//! `Z_n = e^{-snt}·(Σ_i Jg_i^s)^n`, and the pressure is
//! `P(s,t) = log Σ_i Jg_i^s - s·t`. The cylinder-sum path enumerates the words
//! explicitly and is kept as an independent check and as the entry point for
//! bracketed (non-constant) Jacobians.
//!
//! Logarithms are natural throughout.

use serde::Serialize;
use thiserror::Error;

use crate::bowen;
use crate::ifs::DerivativeStats;

/// Default cap on the number of enumerated cylinders.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("{branches}^{depth} cylinders exceed the enumeration budget {budget}")]
    DepthOverflow { branches: usize, depth: usize, budget: u64 },
    #[error("potential parameters must be finite (s = {s}, t = {t})")]
    NonFinite { s: f64, t: f64 },
    #[error("Jacobian bracket for branch {0} is not an ordered positive interval")]
    BadBracket(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialParams {
    /// Bowen exponent.
    pub s: f64,
    /// Shift of the geometric potential.
    pub t: f64,
}

impl PotentialParams {
    pub fn new(s: f64, t: f64) -> Self {
        PotentialParams { s, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMethod {
    ClosedForm,
    CylinderSum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureResult {
    pub value: f64,
    pub method: PressureMethod,
    /// Word length used; 0 for the closed form.
    pub depth: usize,
    /// `|P_n - P_m|` for the companion depth `m` (0 for the closed form).
    pub gap_estimate: f64,
    /// Companion depth used for the gap (`2n` when affordable, else `⌈n/2⌉`).
    pub gap_depth: usize,
}

/// Pressure of `-s·log(e^t·Jf)`. `depth == 0` selects the closed form;
/// otherwise cylinders of length `depth` are enumerated.
pub fn pressure(stats: &DerivativeStats, p: PotentialParams, depth: usize) -> Result<PressureResult, ThermoError> {
    check_params(p)?;
    if depth == 0 {
        return Ok(PressureResult {
            value: closed_form(&stats.per_branch_jacobian, p),
            method: PressureMethod::ClosedForm,
            depth: 0,
            gap_estimate: 0.0,
            gap_depth: 0,
        });
    }
    let log_weights = log_weights(&stats.per_branch_jacobian, p);
    cylinder_pressure(&log_weights, depth, ENUMERATION_BUDGET)
}

/// Closed-form pressure `log Σ Jg_i^s - s·t`.
pub(crate) fn closed_form(jacobians: &[f64], p: PotentialParams) -> f64 {
    log_sum_exp(jacobians.iter().map(|j| p.s * j.ln())) - p.s * p.t
}

fn check_params(p: PotentialParams) -> Result<(), ThermoError> {
    if p.s.is_finite() && p.t.is_finite() {
        Ok(())
    } else {
        Err(ThermoError::NonFinite { s: p.s, t: p.t })
    }
}

/// Per-branch value of the potential `s·log Jg_i - s·t`.
fn log_weights(jacobians: &[f64], p: PotentialParams) -> Vec<f64> {
    jacobians.iter().map(|j| p.s * j.ln() - p.s * p.t).collect()
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn cylinder_pressure(log_weights: &[f64], depth: usize, budget: u64) -> Result<PressureResult, ThermoError> {
    let branches = log_weights.len();
    if !within_budget(branches, depth, budget) {
        return Err(ThermoError::DepthOverflow {
            branches,
            depth,
            budget,
        });
    }
    let value = cylinder_sum(log_weights, depth);
    let gap_depth = if within_budget(branches, 2 * depth, budget) {
        2 * depth
    } else {
        depth.div_ceil(2)
    };
    let gap_estimate = (value - cylinder_sum(log_weights, gap_depth)).abs();
    Ok(PressureResult {
        value,
        method: PressureMethod::CylinderSum,
        depth,
        gap_estimate,
        gap_depth,
    })
}

fn within_budget(branches: usize, depth: usize, budget: u64) -> bool {
    (branches as u64)
        .checked_pow(depth as u32)
        .is_some_and(|count| count <= budget)
}

/// `(1/n)·log Σ_{|w|=n} exp(S_n φ(w))`, summing over every word in
/// lexicographic order with compensated summation.
fn cylinder_sum(log_weights: &[f64], depth: usize) -> f64 {
    // Shift every Birkhoff sum by n·max φ so the largest term is exp(0).
    let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = log_weights.iter().map(|w| w - shift).collect();
    let mut acc = KahanSum::default();
    walk(&shifted, depth, 0.0, &mut acc);
    acc.total().ln() / depth as f64 + shift
}

fn walk(log_weights: &[f64], remaining: usize, birkhoff: f64, acc: &mut KahanSum) {
    if remaining == 1 {
        for w in log_weights {
            acc.add((birkhoff + w).exp());
        }
        return;
    }
    for w in log_weights {
        walk(log_weights, remaining - 1, birkhoff + w, acc);
    }
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum
    }
}

/// Per-branch range `[inf Jg_i, sup Jg_i]` for branches whose Jacobian is not
/// constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianRange {
    pub inf: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureBracket {
    /// Cylinder sum with the infimum of the potential on every branch.
    pub lower: PressureResult,
    /// Cylinder sum with the supremum of the potential (the pressure itself).
    pub upper: PressureResult,
}

/// Cylinder-sum pressure for branches with bracketed Jacobians.
///
/// No distortion constant is assumed: the two sums bracket the pressure of
/// any potential whose per-branch Jacobians stay inside the ranges.
pub fn pressure_bracket(ranges: &[JacobianRange], p: PotentialParams, depth: usize) -> Result<PressureBracket, ThermoError> {
    check_params(p)?;
    for (i, r) in ranges.iter().enumerate() {
        if !(r.inf > 0.0 && r.inf <= r.sup) {
            return Err(ThermoError::BadBracket(i));
        }
    }
    let depth = depth.max(1);
    // For s >= 0 the potential s·log Jg grows with Jg; otherwise it shrinks.
    let (lo_jac, hi_jac): (Vec<f64>, Vec<f64>) = ranges
        .iter()
        .map(|r| if p.s >= 0.0 { (r.inf, r.sup) } else { (r.sup, r.inf) })
        .unzip();
    Ok(PressureBracket {
        lower: cylinder_pressure(&log_weights(&lo_jac, p), depth, ENUMERATION_BUDGET)?,
        upper: cylinder_pressure(&log_weights(&hi_jac, p), depth, ENUMERATION_BUDGET)?,
    })
}

/// Branch-level weights of the equilibrium state (a Bernoulli measure).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsWeights {
    pub weights: Vec<f64>,
}

/// `w_i = Jg_i^s / Σ_j Jg_j^s`; the shift `e^{-st}` cancels.
pub fn gibbs_weights(stats: &DerivativeStats, p: PotentialParams) -> GibbsWeights {
    let logs: Vec<f64> = stats.per_branch_jacobian.iter().map(|j| p.s * j.ln()).collect();
    let norm = log_sum_exp(logs.iter().copied());
    GibbsWeights {
        weights: logs.iter().map(|l| (l - norm).exp()).collect(),
    }
}

/// `∫ log(e^t·Jf) dμ_{s,t} = t + Σ_i w_i·log(1/Jg_i)`.
pub fn lyapunov_volume(stats: &DerivativeStats, p: PotentialParams) -> f64 {
    let w = gibbs_weights(stats, p);
    p.t + w
        .weights
        .iter()
        .zip(&stats.per_branch_jacobian)
        .map(|(w, j)| -w * j.ln())
        .sum::<f64>()
}

/// Entropy `-Σ w_i log w_i` of the Bernoulli equilibrium state.
pub fn entropy(weights: &GibbsWeights) -> f64 {
    -weights
        .weights
        .iter()
        .filter(|w| **w > 0.0)
        .map(|w| w * w.ln())
        .sum::<f64>()
}

/// `h(μ_α)/χ(μ_α)` for the equilibrium state at the Bowen root `α`.
///
/// Since `P(α, 0) = 0`, the variational identity gives `h = α·χ`; the value
/// is computed from `h` and `χ` independently and must agree with `α`.
pub fn dynamical_dimension(stats: &DerivativeStats) -> Result<f64, bowen::BowenError> {
    let root = bowen::solve_bowen(stats, 0.0, 1e-13)?;
    let p = PotentialParams::new(root.alpha, 0.0);
    let h = entropy(&gibbs_weights(stats, p));
    let chi = lyapunov_volume(stats, p);
    let value = h / chi;
    debug_assert!((value - root.alpha).abs() <= 1e-10, "{value} vs {}", root.alpha);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{derivative_stats, SystemSpec};
    use approx::assert_relative_eq;

    fn two_corner() -> DerivativeStats {
        derivative_stats(&SystemSpec::two_corner(0.77, 0.35)).unwrap()
    }

    fn quarter_half() -> DerivativeStats {
        DerivativeStats::from_jacobians(&[0.25, 0.5]).unwrap()
    }

    #[test]
    fn zero_potential_gives_entropy_of_shift() {
        let p = pressure(&two_corner(), PotentialParams::new(0.0, 0.0), 0).unwrap();
        assert_relative_eq!(p.value, 2f64.ln(), epsilon = 1e-15);
        assert_eq!(p.gap_estimate, 0.0);
    }

    #[test]
    fn closed_form_values() {
        let stats = two_corner();
        let p = pressure(&stats, PotentialParams::new(1.0, 0.0), 0).unwrap();
        assert_relative_eq!(p.value, -0.618039708073139898, epsilon = 1e-14);
        let at_root = pressure(&stats, PotentialParams::new(0.5286410248370867, 0.0), 0).unwrap();
        assert!(at_root.value.abs() < 1e-14);
    }

    #[test]
    fn shift_rule() {
        let stats = quarter_half();
        let base = pressure(&stats, PotentialParams::new(0.7, 0.0), 0).unwrap().value;
        let shifted = pressure(&stats, PotentialParams::new(0.7, 0.3), 0).unwrap().value;
        assert_relative_eq!(shifted, base - 0.7 * 0.3, epsilon = 1e-15);
    }

    #[test]
    fn cylinder_sum_matches_closed_form() {
        let stats = DerivativeStats::from_jacobians(&[0.2, 0.3, 0.1]).unwrap();
        let p = PotentialParams::new(0.8, 0.25);
        let numeric = pressure(&stats, p, 10).unwrap();
        let exact = pressure(&stats, p, 0).unwrap();
        assert_eq!(numeric.method, PressureMethod::CylinderSum);
        assert_eq!(numeric.gap_depth, 5);
        assert_relative_eq!(numeric.value, exact.value, epsilon = 1e-12);
        assert!(numeric.gap_estimate < 1e-12);
    }

    #[test]
    fn depth_overflow() {
        let stats = DerivativeStats::from_jacobians(&[0.2, 0.3, 0.1]).unwrap();
        assert!(matches!(
            pressure(&stats, PotentialParams::new(1.0, 0.0), 20),
            Err(ThermoError::DepthOverflow { .. })
        ));
    }

    #[test]
    fn bracket_orders_and_collapses() {
        let ranges = [
            JacobianRange { inf: 0.2, sup: 0.25 },
            JacobianRange { inf: 0.3, sup: 0.3 },
        ];
        let b = pressure_bracket(&ranges, PotentialParams::new(0.6, 0.0), 6).unwrap();
        assert!(b.lower.value < b.upper.value);
        let exact_hi = closed_form(&[0.25, 0.3], PotentialParams::new(0.6, 0.0));
        assert_relative_eq!(b.upper.value, exact_hi, epsilon = 1e-12);

        let tight = [JacobianRange { inf: 0.2, sup: 0.2 }, JacobianRange { inf: 0.3, sup: 0.3 }];
        let b = pressure_bracket(&tight, PotentialParams::new(0.6, 0.0), 6).unwrap();
        assert_eq!(b.lower.value, b.upper.value);
        let bad = [JacobianRange { inf: 0.3, sup: 0.2 }, JacobianRange { inf: 0.3, sup: 0.3 }];
        assert_eq!(
            pressure_bracket(&bad, PotentialParams::new(0.6, 0.0), 6),
            Err(ThermoError::BadBracket(0))
        );
    }

    #[test]
    fn gibbs_weight_examples() {
        let w = gibbs_weights(&two_corner(), PotentialParams::new(0.9, 0.4));
        assert_relative_eq!(w.weights[0], 0.5, epsilon = 1e-15);
        let w = gibbs_weights(&quarter_half(), PotentialParams::new(1.0, 0.0));
        assert_relative_eq!(w.weights[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(w.weights[1], 2.0 / 3.0, epsilon = 1e-15);
        let w = gibbs_weights(&quarter_half(), PotentialParams::new(0.0, 2.0));
        assert_eq!(w.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn lyapunov_examples() {
        let stats = two_corner();
        assert_relative_eq!(
            lyapunov_volume(&stats, PotentialParams::new(0.3, 0.0)),
            1.3111868886330853,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            lyapunov_volume(&stats, PotentialParams::new(0.3, 0.5)),
            1.8111868886330853,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            lyapunov_volume(&quarter_half(), PotentialParams::new(0.0, 0.0)),
            1.0397207708399180,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dynamical_dimension_examples() {
        assert_relative_eq!(dynamical_dimension(&two_corner()).unwrap(), 0.5286410248370867, epsilon = 1e-10);
        let ternary = derivative_stats(&SystemSpec::middle_thirds()).unwrap();
        assert_relative_eq!(dynamical_dimension(&ternary).unwrap(), 0.6309297535714574, epsilon = 1e-10);
        // bisection oracle on (1/4)^a + (1/2)^a = 1, golden-ratio closed form
        let golden = (2.0 / (1.0 + 5f64.sqrt())).ln() / 0.5f64.ln();
        assert_relative_eq!(golden, 0.6942419136306173, epsilon = 1e-14);
        assert_relative_eq!(dynamical_dimension(&quarter_half()).unwrap(), golden, epsilon = 1e-10);
    }
}
