//! Cross-validation against the exact discrete oracle: solve the discretized
//! Kantorovich LP by the transportation simplex, verify the dual certificate
//! and c-monotonicity of the support, and compare the barycentric map with
//! the splitting construction.
//!
//! Run with `cargo run --example oracle_cross_check`.

use otsplit::measure::{SourceMeasure, TargetMeasure};
use otsplit::oracle::{
    barycentric_map, c_monotonicity_check, l1_map_distance, solve_kantorovich, DiscreteProblem,
};
use otsplit::splitting::SplittingProblem;
use otsplit::{CostModel, Domain};
use std::f64::consts::FRAC_PI_2;

fn main() -> otsplit::Result<()> {
    let cost = CostModel::quarter_disk();
    let nu = TargetMeasure::uniform((0.0, FRAC_PI_2), 1024)?;

    let dp = DiscreteProblem::discretize(&cost, |_| 1.0, &nu, 30, 60)?;
    println!("discrete problem: {} source atoms x {} target atoms", dp.sources.len(), dp.targets.len());

    let plan = solve_kantorovich(&dp)?;
    println!("transportation simplex: {} pivots, objective {:.6}", plan.pivots, plan.objective);
    println!("  dual feasibility:         {:.2e}", plan.dual_feasibility);
    println!("  complementary slackness:  {:.2e}", plan.complementary_slackness);

    let mono = c_monotonicity_check(&plan, &dp, 10_000, 42);
    println!("  c-monotonicity violation over {} pairs: {:.2e}", mono.pairs_checked, mono.worst_violation);

    let bary = barycentric_map(&plan, &dp);
    let l1_analytic = l1_map_distance(&bary, &dp, |p| p.x2.atan2(p.x1));
    println!("\nbarycentric map vs arctan(x2/x1): L1 = {l1_analytic:.4}");

    // Against the splitting construction evaluated at the same atoms.
    let mu = SourceMeasure::uniform(Domain::quarter_disk(), 400)?;
    let sp = SplittingProblem::new(cost, mu, nu);
    let vals = sp.map_at_points(&dp.sources);
    let mut acc = 0.0;
    for (i, v) in vals.iter().enumerate() {
        if bary.values[i].is_finite() {
            acc += dp.source_mass[i] * (bary.values[i] - v.y).abs();
        }
    }
    println!("barycentric map vs splitting map:  L1 = {acc:.4}");
    Ok(())
}
