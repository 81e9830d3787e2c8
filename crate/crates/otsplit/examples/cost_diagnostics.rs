//! Cost-function diagnostics: non-degeneracy (A2), the curvature sign
//! condition (A3) with sampled queries, c-linearity and c-convexity of the
//! built-in costs.
//!
//! Run with `cargo run --example cost_diagnostics`.

use otsplit::cost::{CostModel, Domain, MtwQuery, Vec2};
use otsplit::geometry::{c_convexity_check, c_linearity_defect};
use otsplit::Point2;

fn main() -> otsplit::Result<()> {
    let costs = [
        CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0))?,
        CostModel::quarter_disk(),
        CostModel::builtin("separable_quadratic", Domain::unit_square(), (0.0, 1.0))?,
    ];

    for cost in &costs {
        println!("== {} ==", cost.name());
        let a2 = cost.check_a2(20);
        println!("  (A2) non-degeneracy: pass = {}, min |grad dc/dy| = {:.3e}", a2.pass, a2.min_value);
        let a3 = cost.check_a3(50, false);
        println!("  (A3W) weak curvature: pass = {}, min MTW = {:+.3e} ({} skipped)", a3.pass, a3.min_value, a3.skipped);

        let x = Point2::new(0.45, 0.3);
        let defect = c_linearity_defect(cost, x, 9)?;
        let convexity = c_convexity_check(cost, x, 17)?;
        println!("  c-linearity defect at ({}, {}): {:.3e}", x.x1, x.x2, defect);
        println!(
            "  c-convexity: convex = {} (line defect {:.3e}, monotone = {})",
            convexity.convex, convexity.line_defect, convexity.monotone
        );
    }

    // One explicit curvature query on the bilinear cost: u along the level
    // curve, where the curvature must vanish.
    let bilinear = &costs[0];
    let x = Point2::new(0.5, 0.5);
    let q = MtwQuery { x, y: 0.4, u: Vec2::new(1.0, 0.0), v: 0.7 };
    println!(
        "\nbilinear MTW<(1,0), 0.7> at (0.5, 0.5): {:+.3e}",
        bilinear.mtw_curvature(&q, 1e-2)?
    );
    Ok(())
}
