use approx::assert_relative_eq;
use proptest::prelude::*;

use ncbounds::attractor::{generate_cylinders, CloudMode, PointCloud};
use ncbounds::bounds::{self, BoundParams, SigmaOverrides};
use ncbounds::bowen::{alpha_prime, solve_bowen};
use ncbounds::ifs::{
    derivative_stats, image_vertices, perturb_template, strictly_inside_image, DerivativeStats, SystemSpec,
};
use ncbounds::thermo::{entropy, gibbs_weights, lyapunov_volume, pressure, PotentialParams};

const TOL: f64 = 1e-13;

/// 2 to 4 branches in the plane, given by their singular values.
fn singular_values() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec((0.05f64..0.95, 0.05f64..0.95).prop_map(|(a, b)| vec![a, b]), 2..=4)
}

fn stats() -> impl Strategy<Value = DerivativeStats> {
    singular_values().prop_map(|sv| DerivativeStats::from_singular_values(2, sv).unwrap())
}

fn params(stats: &DerivativeStats, delta: f64, rho_frac: f64) -> BoundParams {
    BoundParams::new(delta, rho_frac * stats.inf_jf)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_rule(stats in stats(), s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let p0 = pressure(&stats, PotentialParams::new(s, 0.0), 0).unwrap().value;
        let pt = pressure(&stats, PotentialParams::new(s, t), 0).unwrap().value;
        prop_assert!((pt - (p0 - s * t)).abs() <= 1e-12 * (1.0 + p0.abs()));
    }

    #[test]
    fn cylinder_sum_matches_closed_form(stats in stats(), s in 0.0f64..2.0, t in 0.0f64..1.0, depth in 1usize..8) {
        let p = PotentialParams::new(s, t);
        let closed = pressure(&stats, p, 0).unwrap().value;
        let cyl = pressure(&stats, p, depth).unwrap().value;
        prop_assert!((closed - cyl).abs() <= 1e-10);
    }

    #[test]
    fn gibbs_weights_are_a_distribution(stats in stats(), s in 0.0f64..3.0, t in 0.0f64..2.0) {
        let w = gibbs_weights(&stats, PotentialParams::new(s, t));
        prop_assert!(w.weights.iter().all(|&x| x > 0.0));
        prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let h = entropy(&w);
        prop_assert!(h >= -1e-15 && h <= (stats.branch_count() as f64).ln() + 1e-12);
    }

    #[test]
    fn dynamical_dimension_is_entropy_over_lyapunov(stats in stats(), t in 0.0f64..2.0) {
        let root = solve_bowen(&stats, t, TOL).unwrap();
        let p = PotentialParams::new(root.alpha, t);
        let ratio = entropy(&gibbs_weights(&stats, p)) / lyapunov_volume(&stats, p);
        prop_assert!((ratio - root.alpha).abs() <= 1e-9);
    }

    #[test]
    fn derivative_norm_identities(stats in stats()) {
        let max_jg = stats.per_branch_jacobian.iter().copied().fold(0.0, f64::max);
        prop_assert!((stats.inf_jf * max_jg - 1.0).abs() <= 1e-14);
        prop_assert!(stats.min_jg <= stats.norm_dg.powi(stats.dim as i32) * (1.0 + 1e-14));
        prop_assert!(stats.inf_jf <= stats.sup_jf);
    }

    #[test]
    fn permutation_equivariance(sv in singular_values(), delta in 0.01f64..0.3, rho_frac in 0.0f64..0.1, rot in 0usize..4) {
        let mut permuted = sv.clone();
        let k = rot % permuted.len();
        permuted.rotate_left(k);
        let a = DerivativeStats::from_singular_values(2, sv).unwrap();
        let b = DerivativeStats::from_singular_values(2, permuted).unwrap();
        let pa = params(&a, delta, rho_frac);
        let pb = params(&b, delta, rho_frac);
        let ra = solve_bowen(&a, 0.3, TOL).unwrap().alpha;
        let rb = solve_bowen(&b, 0.3, TOL).unwrap().alpha;
        prop_assert!((ra - rb).abs() <= 1e-12);
        let ba = bounds::box_bounds(&a, &pa).unwrap();
        let bb = bounds::box_bounds(&b, &pb).unwrap();
        prop_assert!((ba.upper - bb.upper).abs() <= 1e-10);
        prop_assert!((ba.lower - bb.lower).abs() <= 1e-10);
    }

    #[test]
    fn alpha_decreases_in_t(stats in stats(), t in 0.0f64..2.0, dt in 0.01f64..1.0) {
        let a = solve_bowen(&stats, t, TOL).unwrap().alpha;
        let b = solve_bowen(&stats, t + dt, TOL).unwrap().alpha;
        prop_assert!(b < a);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn alpha_prime_matches_finite_differences(stats in stats(), t in 0.0f64..2.0) {
        let h = 1e-5;
        let fd = (solve_bowen(&stats, t + h, TOL).unwrap().alpha - solve_bowen(&stats, t - h, TOL).unwrap().alpha) / (2.0 * h);
        let exact = alpha_prime(&stats, t, TOL).unwrap();
        prop_assert!(exact < 0.0);
        prop_assert!((fd - exact).abs() <= 1e-4 * exact.abs());
    }

    #[test]
    fn defining_equation_residuals(stats in stats(), delta in 0.01f64..0.5, rho_frac in 0.0f64..0.1, sigma in 0.0f64..2.0) {
        let p = params(&stats, delta, rho_frac);
        let setup = bounds::Setup::new(&stats, &p).unwrap();
        let d = stats.dim as f64;
        let eps = setup.epsilon;
        let l = setup.lambdas;
        let alpha = solve_bowen(&stats, 0.0, TOL).unwrap().alpha;
        let b = bounds::box_bounds(&stats, &p).unwrap();
        let residual = |rate: f64, a: f64, bound: f64| (rate * (1.0 - a)).exp() * eps.powf(d - bound) - 1.0;
        prop_assert!(residual(l.lambda0, alpha, b.upper).abs() <= 1e-9);
        prop_assert!(residual(l.lambda2, alpha, b.lower).abs() <= 1e-9);
        let h = bounds::hausdorff_bounds(&stats, &p, SigmaOverrides::both(sigma)).unwrap();
        prop_assert!(residual(l.lambda0, h.alpha_bar, h.bounds.upper).abs() <= 1e-9);
        prop_assert!(residual(l.lambda1, h.alpha_underbar, h.bounds.lower).abs() <= 1e-9);
        prop_assert!(b.lower_clamped <= b.upper_clamped);
        prop_assert!(eps < stats.norm_dg);
    }

    #[test]
    fn collapse_with_zero_shift_and_rho(stats in stats(), delta in 0.01f64..0.5) {
        let p = BoundParams::new(delta, 0.0);
        let h = bounds::hausdorff_bounds(&stats, &p, SigmaOverrides::both(0.0)).unwrap();
        prop_assert_eq!(h.bounds.upper, bounds::box_bounds(&stats, &p).unwrap().upper);
    }

    #[test]
    fn curve_decreases_and_inverts(stats in stats(), delta in 0.01f64..0.3, frac in 0.05f64..0.95) {
        let p = BoundParams::new(delta, 0.0);
        let grid: Vec<f64> = (0..50).map(|k| k as f64 * 0.04).collect();
        let curve = bounds::dimension_curve(&stats, &p, &grid).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1].dimension < w[0].dimension));
        let sigma = frac * 1.96;
        let target = bounds::dimension_curve(&stats, &p, &[sigma]).unwrap()[0].dimension;
        let inv = bounds::invert_dimension(&stats, &p, target, Some(1.96), 1e-12).unwrap();
        prop_assert!((inv.sigma - sigma).abs() <= 1e-8);
    }

    #[test]
    fn perturbation_shrinks_images(beta in 0.51f64..0.95, tau in 0.05f64..0.49, margin in 1e-4f64..0.9) {
        let spec = SystemSpec::two_corner(beta, tau);
        let shrunk = perturb_template(&spec, margin).unwrap();
        for (old, new) in spec.branches().iter().zip(shrunk.branches()) {
            for v in image_vertices(new) {
                prop_assert!(strictly_inside_image(old, &v));
            }
        }
        let report = ncbounds::ifs::validate(&shrunk).unwrap();
        prop_assert!(report.border_condition && report.open_condition);
    }

    #[test]
    fn deeper_clouds_refine(beta in 0.51f64..0.95, tau in 0.05f64..0.49, n in 1usize..8) {
        let spec = SystemSpec::two_corner(beta, tau);
        let coarse = generate_cylinders(&spec, n).unwrap();
        let fine = generate_cylinders(&spec, n + 1).unwrap();
        let side = beta.powi(n as i32);
        let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / side).floor() as i64).collect() };
        let fine_cells: std::collections::BTreeSet<Vec<i64>> = fine.points().map(cell).collect();
        // children of a depth-n point move by at most side·√2/2 < side per axis
        for c in coarse.points().map(cell) {
            let near = fine_cells.iter().any(|f| f.iter().zip(&c).all(|(a, b)| (a - b).abs() <= 1));
            prop_assert!(near);
        }
    }

    #[test]
    fn single_point_cloud_has_zero_slope(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let cloud = PointCloud::from_points(2, &[vec![x, y]], CloudMode::DeterministicCylinders { depth: 0 });
        let est = ncbounds::attractor::box_count(&cloud, &[0.5, 0.25, 0.125, 0.0625], false).unwrap();
        prop_assert_eq!(est.slope, 0.0);
    }
}

#[test]
fn two_corner_stats_from_system() {
    let stats = derivative_stats(&SystemSpec::two_corner(0.77, 0.35)).unwrap();
    assert_relative_eq!(stats.inf_jf, 1.0 / (0.77 * 0.35), epsilon = 1e-14);
    assert_relative_eq!(stats.norm_df, 1.0 / 0.35, epsilon = 1e-14);
}
