//! Affine iterated function systems on the unit cube.
//!
//! A [`SystemSpec`] is a finite family of affine contractions
//! `g_i(x) = A_i x + b_i` acting on `[0,1]^d`. The inverse branches define a
//! piecewise expanding map whose repeller is the attractor of the family, so
//! every derivative quantity of the expanding map (`Df`, `Jf`) is read off the
//! singular values of the `A_i`.
//!
//! Images of the cube under affine maps are parallelotopes, which makes the
//! open and border conditions decidable exactly (up to floating point) without
//! sampling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted shrink margin for [`perturb_template`].
pub const MARGIN_MAX: f64 = 1.0;

/// Separations at or below this are treated as contact between closed sets.
const CONTACT_TOL: f64 = 1e-14;

/// Width under which a slab (or rank gap) counts as degenerate.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IfsError {
    #[error("an IFS needs at least two branches, got {0}")]
    TooFewBranches(usize),
    #[error("ambient dimension must be positive")]
    ZeroDimension,
    #[error("branch {branch}: linear part is {rows}x{cols}, expected {dim}x{dim}")]
    NonSquareMatrix {
        branch: String,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("branch {branch}: translation has length {found}, expected {dim}")]
    TranslationLength {
        branch: String,
        found: usize,
        dim: usize,
    },
    #[error("branch {branch}: non-finite coefficient")]
    NonFinite { branch: String },
    #[error("branch {branch}: linear part is singular")]
    SingularBranch { branch: String },
    #[error("branch {branch}: singular value {singular_value} is not below 1")]
    NonContractive { branch: String, singular_value: f64 },
    #[error("margin {margin} outside [0, {max})")]
    MarginTooLarge { margin: f64, max: f64 },
    #[error("branches {first} and {second} still intersect after shrinking by margin {margin}")]
    StillOverlapping {
        first: String,
        second: String,
        margin: f64,
    },
    #[error("need {expected} per-branch entries, got {found}")]
    BranchCountMismatch { expected: usize, found: usize },
}

/// One contraction `x ↦ linear·x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBranch {
    pub linear: DMatrix<f64>,
    pub translation: DVector<f64>,
    pub label: Option<String>,
}

impl AffineBranch {
    pub fn new(linear: DMatrix<f64>, translation: DVector<f64>) -> Self {
        AffineBranch {
            linear,
            translation,
            label: None,
        }
    }

    /// Builds a branch from a row-major matrix.
    pub fn from_rows(rows: &[Vec<f64>], translation: &[f64]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut linear = DMatrix::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().take(ncols) {
                linear[(i, j)] = v;
            }
        }
        AffineBranch::new(linear, DVector::from_column_slice(translation))
    }

    pub fn diagonal(diag: &[f64], translation: &[f64]) -> Self {
        let linear = DMatrix::from_diagonal(&DVector::from_column_slice(diag));
        AffineBranch::new(linear, DVector::from_column_slice(translation))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.linear * x + &self.translation
    }

    /// Singular values sorted descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.linear.clone().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Projection of the image of the unit cube onto `direction`.
    fn support_interval(&self, direction: &DVector<f64>) -> (f64, f64) {
        let base = direction.dot(&self.translation);
        let (mut lo, mut hi) = (base, base);
        for col in self.linear.column_iter() {
            let p = direction.dot(&col);
            if p < 0.0 {
                lo += p;
            } else {
                hi += p;
            }
        }
        (lo, hi)
    }

    /// Axis-aligned bounding box of the image of the unit cube.
    pub fn image_bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|k| {
                let row = self.linear.row(k);
                let neg: f64 = row.iter().filter(|v| **v < 0.0).sum();
                let pos: f64 = row.iter().filter(|v| **v > 0.0).sum();
                (self.translation[k] + neg, self.translation[k] + pos)
            })
            .collect()
    }

    /// Unique fixed point of the contraction.
    pub fn fixed_point(&self) -> Option<DVector<f64>> {
        let n = self.dim();
        let system = DMatrix::identity(n, n) - &self.linear;
        system.lu().solve(&self.translation)
    }
}

/// A validated-shape IFS: at least two square branches of a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemSpecRaw", into = "SystemSpecRaw")]
pub struct SystemSpec {
    branches: Vec<AffineBranch>,
    dim: usize,
}

impl SystemSpec {
    /// Checks shapes only; contraction and geometry are checked by [`validate`].
    pub fn new(branches: Vec<AffineBranch>) -> Result<Self, IfsError> {
        if branches.len() < 2 {
            return Err(IfsError::TooFewBranches(branches.len()));
        }
        let dim = branches[0].linear.nrows();
        if dim == 0 {
            return Err(IfsError::ZeroDimension);
        }
        for (i, b) in branches.iter().enumerate() {
            let name = branch_name(b, i);
            let (rows, cols) = b.linear.shape();
            if rows != dim || cols != dim {
                return Err(IfsError::NonSquareMatrix {
                    branch: name,
                    rows,
                    cols,
                    dim,
                });
            }
            if b.translation.len() != dim {
                return Err(IfsError::TranslationLength {
                    branch: name,
                    found: b.translation.len(),
                    dim,
                });
            }
            if b.linear.iter().chain(b.translation.iter()).any(|v| !v.is_finite()) {
                return Err(IfsError::NonFinite { branch: name });
            }
        }
        Ok(SystemSpec { branches, dim })
    }

    pub fn branches(&self) -> &[AffineBranch] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn branch_name(&self, i: usize) -> String {
        branch_name(&self.branches[i], i)
    }

    /// The two-map example `diag(β, τ)` anchored at the lower-left and
    /// upper-right corners of the unit square.
    pub fn two_corner(beta: f64, tau: f64) -> Self {
        SystemSpec::new(vec![
            AffineBranch::diagonal(&[beta, tau], &[0.0, 0.0]).with_label("g0"),
            AffineBranch::diagonal(&[beta, tau], &[1.0 - beta, 1.0 - tau]).with_label("g1"),
        ])
        .expect("two_corner template is well formed")
    }

    /// Middle-thirds Cantor set on `[0,1]`.
    pub fn middle_thirds() -> Self {
        SystemSpec::new(vec![
            AffineBranch::diagonal(&[1.0 / 3.0], &[0.0]),
            AffineBranch::diagonal(&[1.0 / 3.0], &[2.0 / 3.0]),
        ])
        .expect("well formed")
    }

    /// Product of two middle-thirds Cantor sets (four corner squares).
    pub fn cantor_dust() -> Self {
        let third = 1.0 / 3.0;
        let corners = [[0.0, 0.0], [2.0 * third, 0.0], [0.0, 2.0 * third], [2.0 * third, 2.0 * third]];
        SystemSpec::new(
            corners
                .iter()
                .map(|t| AffineBranch::diagonal(&[third, third], t))
                .collect(),
        )
        .expect("well formed")
    }
}

fn branch_name(b: &AffineBranch, i: usize) -> String {
    b.label.clone().unwrap_or_else(|| format!("g{i}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BranchRaw {
    linear: Vec<Vec<f64>>,
    translation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemSpecRaw {
    branches: Vec<BranchRaw>,
}

impl TryFrom<SystemSpecRaw> for SystemSpec {
    type Error = IfsError;

    fn try_from(raw: SystemSpecRaw) -> Result<Self, Self::Error> {
        let mut branches = Vec::with_capacity(raw.branches.len());
        for (i, b) in raw.branches.into_iter().enumerate() {
            let cols = b.linear.first().map_or(0, Vec::len);
            if let Some(row) = b.linear.iter().find(|r| r.len() != cols) {
                return Err(IfsError::NonSquareMatrix {
                    branch: b.label.unwrap_or_else(|| format!("g{i}")),
                    rows: b.linear.len(),
                    cols: row.len(),
                    dim: b.linear.len(),
                });
            }
            let mut branch = AffineBranch::from_rows(&b.linear, &b.translation);
            branch.label = b.label;
            branches.push(branch);
        }
        SystemSpec::new(branches)
    }
}

impl From<SystemSpec> for SystemSpecRaw {
    fn from(spec: SystemSpec) -> Self {
        SystemSpecRaw {
            branches: spec
                .branches
                .into_iter()
                .map(|b| BranchRaw {
                    linear: b.linear.row_iter().map(|r| r.iter().copied().collect()).collect(),
                    translation: b.translation.iter().copied().collect(),
                    label: b.label,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Images of two branches are not disjoint closed sets.
    OpenCondition { first: String, second: String },
    /// A branch image is not inside the open cube.
    BorderCondition { branch: String, gap: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::OpenCondition { first, second } => {
                write!(f, "open condition: images of {first} and {second} intersect")
            }
            Violation::BorderCondition { branch, gap } => {
                write!(f, "border condition: image of {branch} reaches the cube boundary (gap {gap:.3e})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub regular: bool,
    pub open_condition: bool,
    pub border_condition: bool,
    pub violations: Vec<Violation>,
    /// Distance from the union of branch images to the cube boundary.
    pub border_gap: f64,
    /// Smallest separation between two branch images along a separating axis.
    pub min_separation: f64,
    /// Heuristic: the attractor appears to sit in a proper affine subspace.
    pub volume_reducible_suspect: bool,
}

/// Contractivity plus the open and border conditions.
///
/// Hard errors (singular or non-contractive branch) are returned as `Err`;
/// geometric failures are collected in the report.
pub fn validate(spec: &SystemSpec) -> Result<ValidationReport, IfsError> {
    check_contractive(spec)?;

    let mut violations = Vec::new();
    let mut min_separation = f64::INFINITY;
    let n = spec.branch_count();
    for i in 0..n {
        for j in (i + 1)..n {
            let sep = separation(&spec.branches[i], &spec.branches[j]);
            min_separation = min_separation.min(sep);
            if sep <= CONTACT_TOL {
                violations.push(Violation::OpenCondition {
                    first: spec.branch_name(i),
                    second: spec.branch_name(j),
                });
            }
        }
    }
    let open_condition = violations.is_empty();

    let mut border_gap = f64::INFINITY;
    for (i, b) in spec.branches.iter().enumerate() {
        let gap = b
            .image_bounds()
            .iter()
            .map(|&(lo, hi)| lo.min(1.0 - hi))
            .fold(f64::INFINITY, f64::min)
            .max(0.0);
        border_gap = border_gap.min(gap);
        if gap <= 0.0 {
            violations.push(Violation::BorderCondition {
                branch: spec.branch_name(i),
                gap,
            });
        }
    }
    let border_condition = border_gap > 0.0;

    Ok(ValidationReport {
        regular: open_condition && border_condition,
        open_condition,
        border_condition,
        violations,
        border_gap,
        min_separation,
        volume_reducible_suspect: thin_slab(spec) || affine_hull_rank(spec) < spec.dim,
    })
}

fn check_contractive(spec: &SystemSpec) -> Result<(), IfsError> {
    for (i, b) in spec.branches.iter().enumerate() {
        let sv = b.singular_values();
        let largest = sv[0];
        let smallest = sv[sv.len() - 1];
        if b.linear.determinant() == 0.0 || smallest <= f64::EPSILON * largest.max(1.0) {
            return Err(IfsError::SingularBranch {
                branch: spec.branch_name(i),
            });
        }
        if largest >= 1.0 {
            return Err(IfsError::NonContractive {
                branch: spec.branch_name(i),
                singular_value: largest,
            });
        }
    }
    Ok(())
}

/// Largest gap between the two image parallelotopes over all candidate
/// separating directions; non-positive means the closed images meet.
///
/// `P - Q` is a zonotope generated by the columns of both linear parts, so
/// its facet normals are orthogonal to `d - 1` of those `2d` generators.
fn separation(a: &AffineBranch, b: &AffineBranch) -> f64 {
    let d = a.dim();
    let generators: Vec<DVector<f64>> = a
        .linear
        .column_iter()
        .chain(b.linear.column_iter())
        .map(|c| c.into_owned())
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut consider = |normal: DVector<f64>| {
        let norm = normal.norm();
        if norm <= DEGENERATE_TOL {
            return;
        }
        let n = normal / norm;
        let (alo, ahi) = a.support_interval(&n);
        let (blo, bhi) = b.support_interval(&n);
        best = best.max((blo - ahi).max(alo - bhi));
    };
    if d == 1 {
        consider(DVector::from_element(1, 1.0));
        return best;
    }
    for subset in combinations(generators.len(), d - 1) {
        let cols: Vec<&DVector<f64>> = subset.iter().map(|&k| &generators[k]).collect();
        consider(generalized_cross(&cols, d));
    }
    best
}

/// Vector orthogonal to `d - 1` vectors in `R^d` (cofactor expansion).
fn generalized_cross(vectors: &[&DVector<f64>], d: usize) -> DVector<f64> {
    let m = DMatrix::from_fn(d, d - 1, |r, c| vectors[c][r]);
    DVector::from_fn(d, |k, _| {
        let minor = m.clone().remove_row(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

fn thin_slab(spec: &SystemSpec) -> bool {
    (0..spec.dim).any(|k| {
        let (lo, hi) = spec
            .branches
            .iter()
            .map(|b| b.image_bounds()[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (l, h)| (lo.min(l), hi.max(h)));
        hi - lo < DEGENERATE_TOL
    })
}

/// Dimension of the smallest affine subspace invariant under every branch
/// that contains all fixed points; the attractor spans exactly this subspace.
fn affine_hull_rank(spec: &SystemSpec) -> usize {
    let d = spec.dim;
    let fixed: Vec<DVector<f64>> = spec.branches.iter().filter_map(AffineBranch::fixed_point).collect();
    if fixed.len() != spec.branch_count() {
        return d;
    }
    let mut span: Vec<DVector<f64>> = fixed[1..].iter().map(|p| p - &fixed[0]).collect();
    for _ in 0..=d {
        let mut next = span.clone();
        for v in &span {
            for b in &spec.branches {
                next.push(&b.linear * v);
            }
        }
        span = orthonormal_basis(&next, d);
    }
    span.len()
}

fn orthonormal_basis(vectors: &[DVector<f64>], d: usize) -> Vec<DVector<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for e in &basis {
            w -= e * e.dot(&w);
        }
        let norm = w.norm();
        if norm > 1e-10 * v.norm().max(1.0) && norm > DEGENERATE_TOL {
            basis.push(w / norm);
            if basis.len() == d {
                break;
            }
        }
    }
    basis
}

/// Singular-value statistics of the branches and the global norms entering
/// the bound formulas. For affine branches all of these are constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeStats {
    pub dim: usize,
    /// Per-branch singular values, sorted descending.
    pub per_branch_singular_values: Vec<Vec<f64>>,
    /// `Jg_i = |det A_i|`.
    pub per_branch_jacobian: Vec<f64>,
    /// `‖Dg‖ = max_i s¹_i`.
    pub norm_dg: f64,
    /// `‖Jg‖_min = min_i Jg_i`.
    pub min_jg: f64,
    /// `‖Df‖ = max_i 1/sᵈ_i`.
    pub norm_df: f64,
    pub inf_jf: f64,
    pub sup_jf: f64,
}

impl DerivativeStats {
    /// Builds the statistics from per-branch singular values (any order).
    pub fn from_singular_values(dim: usize, singular_values: Vec<Vec<f64>>) -> Result<Self, IfsError> {
        if singular_values.len() < 2 {
            return Err(IfsError::TooFewBranches(singular_values.len()));
        }
        if dim == 0 {
            return Err(IfsError::ZeroDimension);
        }
        let mut per_branch = Vec::with_capacity(singular_values.len());
        for (i, mut sv) in singular_values.into_iter().enumerate() {
            if sv.len() != dim {
                return Err(IfsError::NonSquareMatrix {
                    branch: format!("g{i}"),
                    rows: sv.len(),
                    cols: sv.len(),
                    dim,
                });
            }
            sv.sort_by(|a, b| b.total_cmp(a));
            if !(sv[dim - 1] > 0.0) {
                return Err(IfsError::SingularBranch { branch: format!("g{i}") });
            }
            if sv[0] >= 1.0 {
                return Err(IfsError::NonContractive {
                    branch: format!("g{i}"),
                    singular_value: sv[0],
                });
            }
            per_branch.push(sv);
        }
        let jac: Vec<f64> = per_branch.iter().map(|sv| sv.iter().product()).collect();
        let norm_dg = per_branch.iter().map(|sv| sv[0]).fold(f64::NEG_INFINITY, f64::max);
        let min_jg = jac.iter().copied().fold(f64::INFINITY, f64::min);
        let max_jg = jac.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm_df = per_branch
            .iter()
            .map(|sv| 1.0 / sv[dim - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(DerivativeStats {
            dim,
            per_branch_singular_values: per_branch,
            per_branch_jacobian: jac,
            norm_dg,
            min_jg,
            norm_df,
            inf_jf: 1.0 / max_jg,
            sup_jf: 1.0 / min_jg,
        })
    }

    /// Builds statistics for a conformal-like system from branch Jacobians
    /// alone (`d = 1`, singular value = Jacobian).
    pub fn from_jacobians(jacobians: &[f64]) -> Result<Self, IfsError> {
        Self::from_singular_values(1, jacobians.iter().map(|&j| vec![j]).collect())
    }

    pub fn branch_count(&self) -> usize {
        self.per_branch_jacobian.len()
    }

    /// True when every branch is a similarity (all singular values equal).
    pub fn is_conformal(&self) -> bool {
        self.per_branch_singular_values
            .iter()
            .all(|sv| sv[0] - sv[sv.len() - 1] <= 1e-12 * sv[0])
    }
}

pub fn derivative_stats(spec: &SystemSpec) -> Result<DerivativeStats, IfsError> {
    check_contractive(spec)?;
    let sv = spec.branches.iter().map(AffineBranch::singular_values).collect();
    DerivativeStats::from_singular_values(spec.dim, sv)
}

/// Shrinks every branch image concentrically by the factor `1/(1+margin)`.
///
/// Each new image is a homothetic copy of the old one about its own centre,
/// so it lies in the interior of the old image and, when the old image was
/// inside the closed cube, inside the open cube.
pub fn perturb_template(spec: &SystemSpec, margin: f64) -> Result<SystemSpec, IfsError> {
    if !(0.0..MARGIN_MAX).contains(&margin) {
        return Err(IfsError::MarginTooLarge {
            margin,
            max: MARGIN_MAX,
        });
    }
    if margin == 0.0 {
        return Ok(spec.clone());
    }
    let centre = DVector::from_element(spec.dim, 0.5);
    let factor = 1.0 / (1.0 + margin);
    let branches = spec
        .branches
        .iter()
        .map(|b| {
            let linear = &b.linear * factor;
            let translation = &b.translation + (&b.linear - &linear) * &centre;
            AffineBranch {
                linear,
                translation,
                label: b.label.clone(),
            }
        })
        .collect();
    let out = SystemSpec::new(branches)?;
    for i in 0..out.branch_count() {
        for j in (i + 1)..out.branch_count() {
            if separation(&out.branches[i], &out.branches[j]) <= CONTACT_TOL {
                return Err(IfsError::StillOverlapping {
                    first: out.branch_name(i),
                    second: out.branch_name(j),
                    margin,
                });
            }
        }
    }
    Ok(out)
}

/// Vertices of the image of the unit cube under `branch`.
pub fn image_vertices(branch: &AffineBranch) -> Vec<DVector<f64>> {
    let d = branch.dim();
    (0..1usize << d)
        .map(|mask| {
            let corner = DVector::from_fn(d, |k, _| if mask >> k & 1 == 1 { 1.0 } else { 0.0 });
            branch.apply(&corner)
        })
        .collect()
}

/// True when `point` lies in the interior of the image of the cube.
pub fn strictly_inside_image(branch: &AffineBranch, point: &DVector<f64>) -> bool {
    match branch.linear.clone().lu().solve(&(point - &branch.translation)) {
        Some(pre) => pre.iter().all(|&c| c > 0.0 && c < 1.0),
        None => false,
    }
}
