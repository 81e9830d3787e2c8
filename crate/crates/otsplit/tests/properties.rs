//! Randomized invariants of the core operations, at reduced resolutions.

use otsplit::cost::{CostModel, Domain, Vec2};
use otsplit::measure::{SourceMeasure, TargetMeasure};
use otsplit::quotient::holder_exponent;
use otsplit::splitting::SplittingProblem;
use otsplit::Point2;
use proptest::prelude::*;

fn bilinear() -> CostModel {
    CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quantile_is_right_inverse_of_cdf(a in -2.0..1.0f64, len in 0.5..3.0f64, q in 0.0..1.0f64) {
        let nu = TargetMeasure::uniform((a, a + len), 512).unwrap();
        let y = nu.quantile(q);
        let back = nu.cdf(y).unwrap();
        prop_assert!((back - q).abs() <= 1e-9, "cdf(quantile({q})) = {back}");
    }

    #[test]
    fn target_cdf_is_monotone(y0 in 0.0..1.0f64, y1 in 0.0..1.0f64) {
        let nu = TargetMeasure::new((0.0, 1.0), |y| 0.5 + y * y, 256).unwrap();
        let (lo, hi) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
        prop_assert!(nu.cdf(lo).unwrap() <= nu.cdf(hi).unwrap() + 1e-15);
    }

    #[test]
    fn region_mass_is_monotone_under_inclusion(t in 0.1..0.9f64, d in 0.0..0.5f64) {
        let mu = SourceMeasure::uniform(Domain::quarter_disk(), 60).unwrap();
        let small = mu.mass_of_region(|p| p.x1 < t);
        let big = mu.mass_of_region(|p| p.x1 < t + d);
        prop_assert!(small <= big + 1e-15);
    }

    #[test]
    fn c_exp_is_right_inverse_of_grad_x(x1 in 0.1..0.9f64, x2 in 0.1..0.9f64, y in 0.05..0.95f64) {
        // p on the image by construction; c_exp must recover y.
        let cost = CostModel::builtin(
            "separable_quadratic", Domain::unit_square(), (0.0, 1.0)).unwrap();
        let x = Point2::new(x1, x2);
        let p = cost.grad_x(x, y).unwrap();
        let back = cost.c_exp(x, p, 1e-6).unwrap();
        prop_assert!((back - y).abs() <= 1e-6, "c_exp returned {back}, wanted {y}");
    }

    #[test]
    fn holder_exponent_lands_in_unit_interval(n in 1u32..3, p in 2.0..50.0f64) {
        let beta = holder_exponent(n, p).unwrap();
        prop_assert!(beta > 0.0 && beta <= 1.0, "beta = {beta}");
    }
}

proptest! {
    // The splitting scan is the most expensive invariant; keep the case count low.
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn splitting_function_brackets_zero(x1 in 0.05..0.95f64, x2 in 0.05..0.95f64) {
        let cost = bilinear();
        let mu = SourceMeasure::uniform(Domain::unit_square(), 60).unwrap();
        let nu = TargetMeasure::uniform((0.0, 1.0), 256).unwrap();
        let sp = SplittingProblem::new(cost, mu, nu).with_y_scan(32);
        let eps = 2.0 / 60.0;
        let x = Point2::new(x1, x2);
        prop_assert!(sp.splitting_function(x, 0.0).unwrap() >= -eps);
        prop_assert!(sp.splitting_function(x, 1.0).unwrap() <= eps);
        // The sup-formula root pushes the residual below the slack.
        let v = sp.optimal_map(x);
        prop_assert!(v.residual <= eps, "residual {} at y = {}", v.residual, v.y);
    }

    #[test]
    fn tangent_is_orthogonal_to_the_gradient(x1 in 0.1..0.9f64, x2 in 0.1..0.9f64, y in 0.1..0.9f64) {
        let cost = CostModel::new(
            "tilted", |p: Point2, yy| (p.x1 + 2.0 * p.x2) * yy, Domain::unit_square(), (0.0, 1.0))
            .with_dcdy(|p, _| p.x1 + 2.0 * p.x2)
            .with_grad_x(|_, yy| Vec2::new(yy, 2.0 * yy))
            .with_grad_x_dcdy(|_, _| Vec2::new(1.0, 2.0));
        let x = Point2::new(x1, x2);
        let t = otsplit::geometry::tangent_direction(&cost, x, y).unwrap();
        let g = cost.grad_x_dcdy(x, y).unwrap();
        prop_assert!(t.dot(g).abs() <= 1e-9);
        prop_assert!((t.norm() - 1.0).abs() <= 1e-12);
    }
}
