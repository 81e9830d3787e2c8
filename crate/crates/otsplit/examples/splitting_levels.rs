//! The mass-splitting construction pointwise: the splitting function
//! `f_x(y)`, its sup-formula root (the optimal map value), and the traced
//! split-level curves that partition the source domain.
//!
//! Run with `cargo run --example splitting_levels`.

use otsplit::measure::{SourceMeasure, TargetMeasure};
use otsplit::splitting::SplittingProblem;
use otsplit::{CostModel, Domain, Point2};
use std::f64::consts::FRAC_PI_2;

fn main() -> otsplit::Result<()> {
    let cost = CostModel::quarter_disk();
    let mu = SourceMeasure::uniform(Domain::quarter_disk(), 250)?;
    let nu = TargetMeasure::uniform((0.0, FRAC_PI_2), 1024)?;
    let sp = SplittingProblem::new(cost, mu, nu);

    let x = Point2::new(0.4, 0.25);
    println!("splitting function at x = ({}, {}):", x.x1, x.x2);
    for k in 0..=8 {
        let y = FRAC_PI_2 * k as f64 / 8.0;
        println!("  f_x({y:.4}) = {:+.4}", sp.splitting_function(x, y)?);
    }
    let v = sp.optimal_map(x);
    println!(
        "optimal map F(x) = {:.4} (polar angle {:.4}), residual {:.1e}, flag {:?}",
        v.y,
        x.x2.atan2(x.x1),
        v.residual,
        v.flag
    );

    println!("\nsplit-level curves (each splits the source mass as nu prescribes):");
    for frac in [0.25, 0.5, 0.75] {
        let y = FRAC_PI_2 * frac;
        let (level, curve) = sp.split_level(y, 256)?;
        println!(
            "  y = {y:.4}: level {level:+.4}, {} component(s), length {:.4}",
            curve.connected_components(),
            curve.total_length()
        );
    }
    Ok(())
}
