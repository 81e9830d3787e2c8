//! Coarea pushforward density on the shelf domain
//! `X = {-1 < x1 < 1, -1 < x2 < phi(x1)}` with `phi(t) = exp(1 - 1/t^2)` on
//! `(0, 1)` and `phi = 0` on `(-1, 0]`: the density `h` of `Q#mu` is `2k` for
//! `z < 0` and `k (1 - phi^{-1}(z))` for `z > 0`, with a jump of size `k` at
//! `z = 0`.
//!
//! Run with `cargo run --example shelf_density`.

use otsplit::measure::SourceMeasure;
use otsplit::quotient::{build_quotient, shelf_phi, shelf_phi_inv, QuotientOptions};
use otsplit::{CostModel, Domain, Point2};

fn main() -> otsplit::Result<()> {
    let domain = Domain::shelf(shelf_phi);
    let cost = CostModel::builtin("bilinear", domain.clone(), (0.0, 1.0))?;
    let mu = SourceMeasure::uniform(domain, 400)?;
    let k = mu.density_at(Point2::new(0.5, -0.5));
    println!("uniform density k = 1/area(X) = {k:.6}");

    let opts = QuotientOptions { z_grid: 512, curve_resolution: 512, ..Default::default() };
    let qs = build_quotient(&cost, &mu, &opts)?;

    println!("{:>6}  {:>10}  {:>10}  {:>8}", "z", "h(z)", "closed", "rel err");
    for &z in &[-0.9, -0.6, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7, 0.9] {
        let h = qs.density(z);
        let closed = if z < 0.0 { 2.0 * k } else { k * (1.0 - shelf_phi_inv(z)) };
        println!("{z:>6.2}  {h:>10.6}  {closed:>10.6}  {:>8.2e}", (h - closed).abs() / closed);
    }

    let jump = qs.density(-0.05) - qs.density(0.05);
    // The continuum density jumps by k at z = 0; sampling at z = ±0.05 adds
    // the slope of the z > 0 branch on top of it.
    println!("\nh(-0.05) - h(+0.05) = {jump:.6} ({:.3} k)", jump / k);
    Ok(())
}
