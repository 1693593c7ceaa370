//! Attractor point clouds, grid box counting and the covered-volume proxy.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ifs::SystemSpec;
use crate::thermo::ENUMERATION_BUDGET;

/// Chaos-game iterates thrown away before sampling.
pub const BURN_IN: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttractorError {
    #[error("{branches}^{depth} points exceed the enumeration budget {budget}")]
    BudgetExceeded { branches: usize, depth: usize, budget: u64 },
    #[error("need at least {needed} scales or depths, got {found}")]
    DegenerateScales { needed: usize, found: usize },
    #[error("scales must be strictly descending in (0, 1] (index {0})")]
    InvalidScales(usize),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("no cloud point falls in the tracked atom at depth {0}")]
    EmptyIntersection(usize),
    #[error("track word must be non-empty with branch indices below {0}")]
    InvalidWord(usize),
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("cloud dimension {cloud} differs from system dimension {system}")]
    DimensionMismatch { cloud: usize, system: usize },
    #[error("invalid reference parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CloudMode {
    DeterministicCylinders { depth: usize },
    ChaosGame { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    mode: CloudMode,
}

impl PointCloud {
    pub fn from_points(dim: usize, points: &[Vec<f64>], mode: CloudMode) -> Self {
        PointCloud {
            dim,
            coords: points.iter().flatten().copied().collect(),
            mode,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn mode(&self) -> CloudMode {
        self.mode
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }
}

/// Row-major copy of one branch for tight loops.
struct FlatMap {
    linear: Vec<f64>,
    translation: Vec<f64>,
}

impl FlatMap {
    fn new(linear: &DMatrix<f64>, translation: &DVector<f64>) -> Self {
        let d = translation.len();
        let mut rows = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                rows.push(linear[(r, c)]);
            }
        }
        FlatMap {
            linear: rows,
            translation: translation.iter().copied().collect(),
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        let d = x.len();
        for r in 0..d {
            let row = &self.linear[r * d..(r + 1) * d];
            out.push(self.translation[r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
    }
}

fn flat_maps(spec: &SystemSpec) -> Vec<FlatMap> {
    spec.branches()
        .iter()
        .map(|b| FlatMap::new(&b.linear, &b.translation))
        .collect()
}

/// Deterministic cloud: the cube centre pushed through every length-`depth` word.
pub fn generate_cylinders(spec: &SystemSpec, depth: usize) -> Result<PointCloud, AttractorError> {
    let k = spec.branch_count();
    let total = (k as u64).checked_pow(depth as u32).filter(|&n| n <= ENUMERATION_BUDGET);
    let Some(total) = total else {
        return Err(AttractorError::BudgetExceeded {
            branches: k,
            depth,
            budget: ENUMERATION_BUDGET,
        });
    };
    let d = spec.dim();
    let maps = flat_maps(spec);
    let mut coords = vec![0.5; d];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(coords.len() * k);
        for map in &maps {
            for x in coords.chunks_exact(d) {
                map.apply_into(x, &mut next);
            }
        }
        coords = next;
    }
    debug_assert_eq!(coords.len() as u64, total * d as u64);
    Ok(PointCloud {
        dim: d,
        coords,
        mode: CloudMode::DeterministicCylinders { depth },
    })
}

/// Random-composition orbit from the cube centre with uniform branch choice.
pub fn generate_chaos_game(spec: &SystemSpec, samples: usize, seed: u64) -> PointCloud {
    let d = spec.dim();
    let maps = flat_maps(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.5; d];
    let mut scratch = Vec::with_capacity(d);
    let mut coords = Vec::with_capacity(samples * d);
    for step in 0..BURN_IN + samples {
        scratch.clear();
        maps[rng.gen_range(0..maps.len())].apply_into(&x, &mut scratch);
        std::mem::swap(&mut x, &mut scratch);
        if step >= BURN_IN {
            coords.extend_from_slice(&x);
        }
    }
    PointCloud {
        dim: d,
        coords,
        mode: CloudMode::ChaosGame { samples, seed },
    }
}

pub fn generate(spec: &SystemSpec, mode: CloudMode) -> Result<PointCloud, AttractorError> {
    match mode {
        CloudMode::DeterministicCylinders { depth } => generate_cylinders(spec, depth),
        CloudMode::ChaosGame { samples, seed } => Ok(generate_chaos_game(spec, samples, seed)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    LinearFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    /// Scales dropped from the regression (the coarsest ones).
    pub dropped: usize,
}

/// Number of distinct cells `⌊x/side⌋` among the points.
fn occupied_cells<'a>(points: impl Iterator<Item = &'a [f64]>, dim: usize, side: f64) -> u64 {
    let cells_per_axis = (1.0 / side).ceil() as u64 + 2;
    let bits = 64 - cells_per_axis.leading_zeros();
    if bits as usize * dim <= 128 {
        let mut keys: Vec<u128> = points
            .map(|p| {
                p.iter().fold(0u128, |acc, &x| {
                    let cell = ((x / side).floor() as i64 + 1).max(0) as u128;
                    (acc << bits) | cell
                })
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len() as u64
    } else {
        let mut keys: Vec<Vec<i64>> = points
            .map(|p| p.iter().map(|&x| (x / side).floor() as i64).collect())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len() as u64
    }
}

/// Occupied-cell counts on origin-anchored grids and the regression of
/// `log N` on `log(1/ρ)`. `drop_coarse` removes the two coarsest scales from
/// the fit (their counts are still reported).
pub fn box_count(cloud: &PointCloud, scales: &[f64], drop_coarse: bool) -> Result<GridEstimate, AttractorError> {
    if cloud.is_empty() {
        return Err(AttractorError::EmptyCloud);
    }
    if let Some(i) = scales.iter().position(|&s| !(s > 0.0 && s <= 1.0)) {
        return Err(AttractorError::InvalidScales(i));
    }
    if let Some(i) = scales.windows(2).position(|w| !(w[1] < w[0])) {
        return Err(AttractorError::InvalidScales(i + 1));
    }
    let dropped = if drop_coarse { 2 } else { 0 };
    if scales.len() < dropped + 3 {
        return Err(AttractorError::DegenerateScales {
            needed: dropped + 3,
            found: scales.len(),
        });
    }
    let counts: Vec<u64> = scales
        .iter()
        .map(|&s| occupied_cells(cloud.points(), cloud.dim, s))
        .collect();
    let x: Vec<f64> = scales[dropped..].iter().map(|s| -s.ln()).collect();
    let y: Vec<f64> = counts[dropped..].iter().map(|&c| (c as f64).ln()).collect();
    let fit = least_squares(&x, &y);
    Ok(GridEstimate {
        scales: scales.to_vec(),
        counts,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_stderr: fit.slope_stderr,
        r_squared: fit.r_squared,
        dropped,
    })
}

/// `2^{-lo}, …, 2^{-hi}`.
pub fn dyadic_scales(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaSample {
    pub depth: usize,
    /// `εⁿ`-cells meeting the attractor inside the atom.
    pub occupied: u64,
    /// Ball volume of the occupied cells over the atom volume.
    pub rho_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaEstimate {
    pub per_depth: Vec<SigmaSample>,
    /// Slope of `-log ρ` against `n`.
    pub rate: f64,
}

/// Volume of the Euclidean unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Grid proxy for the covered-volume fraction of the atoms along `track_word`
/// (extended cyclically). The attractor inside an atom `g_w(cube)` is
/// `g_w(Λ)`, so the cloud is mapped through `g_w` rather than filtered.
pub fn estimate_sigma(
    spec: &SystemSpec,
    cloud: &PointCloud,
    epsilon: f64,
    track_word: &[usize],
    depths: &[usize],
) -> Result<SigmaEstimate, AttractorError> {
    let d = spec.dim();
    if cloud.dim != d {
        return Err(AttractorError::DimensionMismatch { cloud: cloud.dim, system: d });
    }
    if track_word.is_empty() || track_word.iter().any(|&i| i >= spec.branch_count()) {
        return Err(AttractorError::InvalidWord(spec.branch_count()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(AttractorError::InvalidEpsilon(epsilon));
    }
    if depths.len() < 2 {
        return Err(AttractorError::DegenerateScales {
            needed: 2,
            found: depths.len(),
        });
    }
    let omega = unit_ball_volume(d);
    let mut per_depth = Vec::with_capacity(depths.len());
    for &n in depths {
        let mut linear = DMatrix::<f64>::identity(d, d);
        let mut translation = DVector::<f64>::zeros(d);
        for j in 0..n {
            let b = &spec.branches()[track_word[j % track_word.len()]];
            translation += &linear * &b.translation;
            linear *= &b.linear;
        }
        let map = FlatMap::new(&linear, &translation);
        let mut mapped = Vec::with_capacity(cloud.coords.len());
        for p in cloud.points() {
            map.apply_into(p, &mut mapped);
        }
        if mapped.is_empty() {
            return Err(AttractorError::EmptyIntersection(n));
        }
        let side = epsilon.powi(n as i32);
        let occupied = occupied_cells(mapped.chunks_exact(d), d, side);
        let rho_fraction = occupied as f64 * omega * side.powi(d as i32) / linear.determinant().abs();
        per_depth.push(SigmaSample {
            depth: n,
            occupied,
            rho_fraction,
        });
    }
    let x: Vec<f64> = per_depth.iter().map(|s| s.depth as f64).collect();
    let y: Vec<f64> = per_depth.iter().map(|s| -s.rho_fraction.ln()).collect();
    Ok(SigmaEstimate {
        rate: least_squares(&x, &y).slope,
        per_depth,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ReferenceFamily {
    /// `diag(β, τ)` at the origin and at `(1-β, 1-τ)`.
    TwoCornerAffine { beta: f64, tau: f64 },
    BedfordMcMullen { columns: u32, rows: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceDimension {
    /// Box and Hausdorff dimensions agree and equal `value`.
    Exact { value: f64 },
    /// Box dimension; the Hausdorff dimension agrees only for almost every
    /// parameter (exceptions include Pisot reciprocals).
    BoxWithCaveat { value: f64, caveat: String },
    Undefined { note: String },
}

impl ReferenceDimension {
    pub fn value(&self) -> Option<f64> {
        match self {
            ReferenceDimension::Exact { value } | ReferenceDimension::BoxWithCaveat { value, .. } => Some(*value),
            ReferenceDimension::Undefined { .. } => None,
        }
    }
}

pub fn reference_dimension(family: ReferenceFamily) -> Result<ReferenceDimension, AttractorError> {
    match family {
        ReferenceFamily::TwoCornerAffine { beta, tau } => {
            if !(0.0 < tau && tau < beta && beta < 1.0) {
                return Err(AttractorError::InvalidParams(format!("need 0 < tau < beta < 1, got beta = {beta}, tau = {tau}")));
            }
            if beta == 0.5 || tau == 0.5 {
                return Err(AttractorError::InvalidParams("beta and tau must differ from 1/2".into()));
            }
            if beta < 0.5 {
                Ok(ReferenceDimension::Exact {
                    value: 2f64.ln() / (1.0 / beta).ln(),
                })
            } else {
                Ok(ReferenceDimension::BoxWithCaveat {
                    value: (2.0 * beta / tau).ln() / (1.0 / tau).ln(),
                    caveat: "Hausdorff dimension equals this value for almost every beta > 1/2; \
                             reciprocals of Pisot numbers are exceptions"
                        .into(),
                })
            }
        }
        ReferenceFamily::BedfordMcMullen { columns, rows } => {
            if columns < 2 || rows < 2 {
                return Err(AttractorError::InvalidParams(format!("grid {columns}x{rows} too small")));
            }
            Ok(ReferenceDimension::Undefined {
                note: "carpet formulas depend on the digit set and are not implemented".into(),
            })
        }
    }
}
