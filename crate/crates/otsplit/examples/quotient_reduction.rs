//! The foliation quotient of a c-linear cost: the quotient coordinate `Q`,
//! the reduced cost `b(z, y)`, the coarea pushforward density `h`, and the
//! one-dimensional solve of the reduced problem.
//!
//! Run with `cargo run --example quotient_reduction`.

use otsplit::measure::{SourceMeasure, TargetMeasure};
use otsplit::quotient::{build_quotient, QuotientOptions};
use otsplit::{CostModel, Domain, Point2};

fn main() -> otsplit::Result<()> {
    let cost = CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0))?;
    let mu = SourceMeasure::uniform(Domain::unit_square(), 200)?;
    let opts = QuotientOptions { z_grid: 256, curve_resolution: 256, ..Default::default() };
    let qs = build_quotient(&cost, &mu, &opts)?;

    let (z_min, z_max) = qs.z_range();
    println!("quotient of c = x2*y on the unit square");
    println!("  Z = ({z_min:.4}, {z_max:.4}), min JQ = {:.4}", qs.min_jq());
    let x = Point2::new(0.3, 0.7);
    println!("  Q(0.3, 0.7) = {:.4} (the leaf coordinate is x2)", qs.q(x));

    println!("  reduced cost b(z, y) at z = 0.5:");
    for y in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("    b(0.5, {y:.2}) = {:+.4}", qs.reduced_cost(0.5, y)?);
    }

    println!("  pushforward density h(z) (uniform source => h = 1):");
    for z in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("    h({z:.1}) = {:.4}", qs.density(z));
    }

    for &p in &[1.0, 2.0, 4.0] {
        let b = qs.lp_bound_check(&mu, p)?;
        println!(
            "  L^{p} bound: integral {:.4} <= (C/K)^(p-1) * integral f^p = {:.4} — {}",
            b.lhs,
            b.rhs,
            if b.pass { "holds" } else { "violated" }
        );
    }

    let nu = TargetMeasure::uniform((0.0, 1.0), 512)?;
    let t = qs.solve_1d(&nu)?;
    println!("  reduced 1D map (antitone = {}):", t.antitone);
    for z in [0.2, 0.5, 0.8] {
        println!("    T({z:.1}) = {:.4}", t.eval(z));
    }
    Ok(())
}
