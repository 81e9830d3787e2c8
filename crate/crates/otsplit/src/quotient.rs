//! The equal-dimension reduction: quotient map `Q = ∂c/∂y(·, y0)` collapsing
//! the foliation leaves, the reduced cost `b(z, y) = c(x, y) - c(x, y0)` for
//! any representative `x ∈ Q⁻¹(z)`, the coarea pushforward density
//! `h(z) = ∫_{Q⁻¹(z)} f/JQ dH¹`, and the one-dimensional quantile solver for
//! the reduced problem.

use crate::cost::{CostModel, Point2};
use crate::geometry::{c_linearity_defect, IsoField};
use crate::measure::{SourceMeasure, TargetMeasure};
use crate::{Error, Result};

/// Options for [`build_quotient`].
#[derive(Debug, Clone)]
pub struct QuotientOptions {
    /// Reference y0; defaults to the midpoint of the target interval.
    pub y0: Option<f64>,
    pub z_grid: usize,
    pub curve_resolution: usize,
    pub linearity_tolerance: f64,
}

impl Default for QuotientOptions {
    fn default() -> Self {
        QuotientOptions {
            y0: None,
            z_grid: 512,
            curve_resolution: 512,
            linearity_tolerance: 1e-3,
        }
    }
}

/// The assembled quotient structure of a c-linear cost.
pub struct QuotientStructure {
    cost: CostModel,
    y0: f64,
    z_min: f64,
    z_max: f64,
    /// Midpoints of the Z grid.
    z_grid: Vec<f64>,
    /// Normalized pushforward density at the grid midpoints.
    h: Vec<f64>,
    /// Raw-to-normalized density scale.
    h_scale: f64,
    /// CDF of h at the grid midpoints.
    h_cdf: Vec<f64>,
    /// Cached Q field for contour extraction.
    field: IsoField,
    curve_resolution: usize,
    /// Representative of Q⁻¹(z) per grid midpoint.
    representatives: Vec<Point2>,
    /// Global lower bound on JQ over the source cells.
    min_jq: f64,
    /// Upper bound on the arclength of Q⁻¹(z) over the grid.
    max_curve_length: f64,
}

impl std::fmt::Debug for QuotientStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuotientStructure")
            .field("y0", &self.y0)
            .field("z_range", &(self.z_min, self.z_max))
            .field("min_jq", &self.min_jq)
            .field("max_curve_length", &self.max_curve_length)
            .finish()
    }
}

/// Builds the quotient of a c-linear cost: checks linearity at sampled points,
/// assembles the Z interval, representatives, and the coarea density table.
pub fn build_quotient(
    cost: &CostModel,
    mu: &SourceMeasure,
    opts: &QuotientOptions,
) -> Result<QuotientStructure> {
    let (a, b) = cost.y_range();
    let y0 = opts.y0.unwrap_or(0.5 * (a + b));

    // c-linearity gate at a coarse sample of interior points.
    let r = cost.domain().rect;
    let mut worst_defect = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let p = Point2::new(
                r.x1_min + (i as f64 + 0.5) / 4.0 * r.width(),
                r.x2_min + (j as f64 + 0.5) / 4.0 * r.height(),
            );
            if !cost.domain().contains(p) {
                continue;
            }
            worst_defect = worst_defect.max(c_linearity_defect(cost, p, 9)?);
        }
    }
    if worst_defect > opts.linearity_tolerance {
        return Err(Error::NotCLinear {
            defect: worst_defect,
            tolerance: opts.linearity_tolerance,
        });
    }

    let q = |p: Point2| cost.dcdy_unchecked(p, y0);
    let field = IsoField::sample(r, opts.curve_resolution, q);

    let mut z_min = f64::INFINITY;
    let mut z_max = f64::NEG_INFINITY;
    let mut min_jq = f64::INFINITY;
    for cell in mu.cells() {
        let z = q(cell.center);
        z_min = z_min.min(z);
        z_max = z_max.max(z);
        min_jq = min_jq.min(cost.grad_x_dcdy(cell.center, y0)?.norm());
    }
    if min_jq < 1e-9 {
        return Err(Error::DegeneratePoint(r.center(), y0));
    }

    let m = opts.z_grid;
    let dz = (z_max - z_min) / m as f64;
    let z_grid: Vec<f64> = (0..m).map(|k| z_min + (k as f64 + 0.5) * dz).collect();

    // Raw coarea density per grid midpoint, then post-hoc normalization.
    let domain = mu.domain().clone();
    let inside = move |p: Point2| domain.contains(p);
    let mut h_raw = Vec::with_capacity(m);
    let mut max_curve_length = 0.0f64;
    let mut representatives = Vec::with_capacity(m);
    for &z in &z_grid {
        let polylines = field.trace(z, Some(&q), Some(&inside));
        let mut len = 0.0;
        let mut integral = 0.0;
        let mut rep: Option<Point2> = None;
        for pl in &polylines {
            for seg in pl.windows(2) {
                let l = seg[0].dist(seg[1]);
                len += l;
                let w = |p: Point2| {
                    mu.density_at(p) / cost.grad_x_dcdy(p, y0).map(|g| g.norm()).unwrap_or(1.0)
                };
                integral += l * 0.5 * (w(seg[0]) + w(seg[1]));
            }
            if rep.is_none() && !pl.is_empty() {
                rep = Some(pl[pl.len() / 2]);
            }
        }
        max_curve_length = max_curve_length.max(len);
        h_raw.push(integral);
        representatives.push(rep.unwrap_or_else(|| r.center()));
    }
    let total: f64 = h_raw.iter().map(|h| h * dz).sum();
    if total <= 0.0 {
        return Err(Error::EmptyCurve(z_min));
    }
    let h_scale = 1.0 / total;
    let h: Vec<f64> = h_raw.iter().map(|v| v * h_scale).collect();
    let mut h_cdf = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &v in &h {
        acc += v * dz;
        h_cdf.push(acc.min(1.0));
    }

    // Sharpen representatives: move each to Q = z exactly along the gradient.
    let mut qs = QuotientStructure {
        cost: cost.clone(),
        y0,
        z_min,
        z_max,
        z_grid,
        h,
        h_scale,
        h_cdf,
        field,
        curve_resolution: opts.curve_resolution,
        representatives,
        min_jq,
        max_curve_length,
    };
    for k in 0..m {
        let z = qs.z_grid[k];
        if let Ok(p) = qs.representative_from(qs.representatives[k], z) {
            qs.representatives[k] = p;
        }
    }
    Ok(qs)
}

impl QuotientStructure {
    pub fn y0(&self) -> f64 {
        self.y0
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z_min, self.z_max)
    }

    pub fn min_jq(&self) -> f64 {
        self.min_jq
    }

    pub fn max_curve_length(&self) -> f64 {
        self.max_curve_length
    }

    pub fn z_grid(&self) -> &[f64] {
        &self.z_grid
    }

    pub fn density_table(&self) -> &[f64] {
        &self.h
    }

    /// The quotient map `Q(x) = ∂c/∂y(x, y0)`.
    pub fn q(&self, x: Point2) -> f64 {
        self.cost.dcdy_unchecked(x, self.y0)
    }

    /// `JQ(x) = |∇_x(∂c/∂y)(x, y0)|`.
    pub fn jq(&self, x: Point2) -> f64 {
        self.cost
            .grad_x_dcdy(x, self.y0)
            .map(|g| g.norm())
            .unwrap_or(0.0)
    }

    fn grid_index(&self, z: f64) -> usize {
        let m = self.z_grid.len();
        let dz = (self.z_max - self.z_min) / m as f64;
        (((z - self.z_min) / dz - 0.5).round() as isize).clamp(0, m as isize - 1) as usize
    }

    /// A point with `Q(x) = z`, found by walking from a start point along the
    /// gradient of Q and bisecting. Start points double as alternate
    /// transverse-segment anchors.
    pub fn representative_from(&self, start: Point2, z: f64) -> Result<Point2> {
        let rect = self.cost.domain().rect;
        let grad = self.cost.grad_x_dcdy(start, self.y0)?;
        if grad.norm() < 1e-12 {
            return Err(Error::DegeneratePoint(start, self.y0));
        }
        let dir = grad.normalized();
        let g = |t: f64| self.q(start.offset(dir, t));
        // Expand a bracket along the segment, staying in the rectangle.
        let span = rect.width() + rect.height();
        let mut t_lo = 0.0f64;
        let mut t_hi = 0.0f64;
        let g0 = g(0.0);
        let want_up = z > g0;
        let mut step = 1e-3 * span;
        let mut t = 0.0;
        let mut bracketed = false;
        for _ in 0..64 {
            let t_next = if want_up { t + step } else { t - step };
            let p = start.offset(dir, t_next);
            if !rect.contains(p) {
                break;
            }
            let v = g(t_next);
            if (v >= z) == want_up {
                t_lo = t.min(t_next);
                t_hi = t.max(t_next);
                bracketed = true;
                break;
            }
            t = t_next;
            step *= 1.6;
        }
        // Try the opposite direction before giving up (Q need not increase
        // along +grad globally).
        if !bracketed {
            let mut step = 1e-3 * span;
            let mut t = 0.0;
            for _ in 0..64 {
                let t_next = if want_up { t - step } else { t + step };
                let p = start.offset(dir, t_next);
                if !rect.contains(p) {
                    return Err(Error::OutOfRange(z));
                }
                let v = g(t_next);
                if (v >= z) == want_up {
                    t_lo = t.min(t_next);
                    t_hi = t.max(t_next);
                    bracketed = true;
                    break;
                }
                t = t_next;
                step *= 1.6;
            }
        }
        if !bracketed {
            return Err(Error::OutOfRange(z));
        }
        let (mut lo, mut hi) = (t_lo, t_hi);
        let f_lo = g(lo) - z;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f_lo * (g(mid) - z) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t_root = 0.5 * (lo + hi);
        let p = start.offset(dir, t_root);
        if (self.q(p) - z).abs() > 1e-8 * (1.0 + z.abs()) {
            return Err(Error::OutOfRange(z));
        }
        Ok(p)
    }

    /// The stored representative for `z` (refined from the nearest grid one).
    pub fn representative(&self, z: f64) -> Result<Point2> {
        let eps = 1e-9 * (1.0 + self.z_max.abs() + self.z_min.abs());
        if z < self.z_min - eps || z > self.z_max + eps {
            return Err(Error::OutOfRange(z));
        }
        let k = self.grid_index(z);
        self.representative_from(self.representatives[k], z)
    }

    /// The reduced cost `b(z, y) = c(x, y) - c(x, y0)` for `x ∈ Q⁻¹(z)`.
    pub fn reduced_cost(&self, z: f64, y: f64) -> Result<f64> {
        let x = self.representative(z)?;
        Ok(self.cost.eval(x, y) - self.cost.eval(x, self.y0))
    }

    /// Coarea pushforward density at `z`, traced at the given resolution and
    /// rescaled by the stored normalization.
    pub fn pushforward_density(
        &self,
        mu: &SourceMeasure,
        z: f64,
        curve_resolution: usize,
    ) -> Result<f64> {
        let y0 = self.y0;
        let cost = &self.cost;
        let q = |p: Point2| cost.dcdy_unchecked(p, y0);
        let domain = mu.domain().clone();
        let inside = move |p: Point2| domain.contains(p);
        let polylines = if curve_resolution == self.curve_resolution {
            self.field.trace(z, Some(&q), Some(&inside))
        } else {
            IsoField::sample(cost.domain().rect, curve_resolution, q).trace(
                z,
                Some(&q),
                Some(&inside),
            )
        };
        if polylines.iter().all(|pl| pl.len() < 2) {
            return Err(Error::EmptyCurve(z));
        }
        let mut integral = 0.0;
        for pl in &polylines {
            for seg in pl.windows(2) {
                let w = |p: Point2| mu.density_at(p) / self.jq(p).max(1e-300);
                integral += seg[0].dist(seg[1]) * 0.5 * (w(seg[0]) + w(seg[1]));
            }
        }
        Ok(integral * self.h_scale)
    }

    /// Interpolated density from the precomputed table.
    pub fn density(&self, z: f64) -> f64 {
        let m = self.z_grid.len();
        let dz = (self.z_max - self.z_min) / m as f64;
        let t = ((z - self.z_min) / dz - 0.5).clamp(0.0, (m - 1) as f64);
        let i = (t.floor() as usize).min(m - 2);
        let frac = t - i as f64;
        self.h[i] + frac * (self.h[i + 1] - self.h[i])
    }

    /// CDF of the pushforward density.
    pub fn density_cdf(&self, z: f64) -> f64 {
        let m = self.z_grid.len();
        let dz = (self.z_max - self.z_min) / m as f64;
        if z <= self.z_min {
            return 0.0;
        }
        if z >= self.z_max {
            return 1.0;
        }
        let t = (z - self.z_min) / dz;
        let i = (t.floor() as usize).min(m - 1);
        let prev = if i == 0 { 0.0 } else { self.h_cdf[i - 1] };
        let frac = t - i as f64;
        (prev + frac * (self.h_cdf[i] - prev)).clamp(0.0, 1.0)
    }

    /// Both sides of the Lᵖ bound `∫ h^p ≤ (C/K)^{p-1} ∫ f^p` with the measured
    /// curve-length bound C and Jacobian floor K.
    pub fn lp_bound_check(&self, mu: &SourceMeasure, p: f64) -> Result<LpBound> {
        if p < 1.0 {
            return Err(Error::InvalidArgument(format!("need p >= 1, got {p}")));
        }
        if self.min_jq < 1e-9 {
            return Err(Error::DegeneratePoint(self.cost.domain().rect.center(), self.y0));
        }
        let m = self.z_grid.len();
        let dz = (self.z_max - self.z_min) / m as f64;
        let lhs: f64 = self.h.iter().map(|h| h.powf(p) * dz).sum();
        let f_integral: f64 = mu
            .cells()
            .iter()
            .map(|c| (c.mass / mu.cell_area()).powf(p) * mu.cell_area())
            .sum();
        let rhs = (self.max_curve_length / self.min_jq).powf(p - 1.0) * f_integral;
        let slack = 0.05;
        Ok(LpBound { p, lhs, rhs, pass: lhs <= rhs * (1.0 + slack) })
    }

    /// Solves the reduced 1D problem by quantile coupling: monotone when the
    /// cross-derivative of `b` is negative on `Z × Y`, antitone when positive.
    pub fn solve_1d(&self, nu: &TargetMeasure) -> Result<ReducedMap> {
        let (a, b) = self.cost.y_range();
        let m = 12usize;
        let hz = (self.z_max - self.z_min) / 64.0;
        let hy = (b - a) / 64.0;
        let mut sign = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let z = self.z_min + (i as f64 + 0.5) / m as f64 * (self.z_max - self.z_min);
                let y = a + (j as f64 + 0.5) / m as f64 * (b - a);
                let zl = (z - hz).max(self.z_min);
                let zr = (z + hz).min(self.z_max);
                let yl = (y - hy).max(a);
                let yr = (y + hy).min(b);
                let bzy = (self.reduced_cost(zr, yr)? - self.reduced_cost(zr, yl)?
                    - self.reduced_cost(zl, yr)?
                    + self.reduced_cost(zl, yl)?)
                    / ((zr - zl) * (yr - yl));
                if bzy.abs() < 1e-10 {
                    continue;
                }
                if sign == 0.0 {
                    sign = bzy.signum();
                } else if sign != bzy.signum() {
                    return Err(Error::MixedSign);
                }
            }
        }
        if sign == 0.0 {
            return Err(Error::MixedSign);
        }
        Ok(ReducedMap {
            z_min: self.z_min,
            z_max: self.z_max,
            z_grid: self.z_grid.clone(),
            h_cdf: self.h_cdf.clone(),
            antitone: sign > 0.0,
            nu: nu.clone(),
        })
    }
}

/// Measured sides of the Lᵖ bound.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LpBound {
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// The optimal map of the reduced 1D problem: a quantile coupling of the
/// pushforward density with the target.
#[derive(Debug, Clone)]
pub struct ReducedMap {
    z_min: f64,
    z_max: f64,
    z_grid: Vec<f64>,
    h_cdf: Vec<f64>,
    pub antitone: bool,
    nu: TargetMeasure,
}

impl ReducedMap {
    fn cdf(&self, z: f64) -> f64 {
        let m = self.z_grid.len();
        let dz = (self.z_max - self.z_min) / m as f64;
        if z <= self.z_min {
            return 0.0;
        }
        if z >= self.z_max {
            return 1.0;
        }
        let t = (z - self.z_min) / dz;
        let i = (t.floor() as usize).min(m - 1);
        let prev = if i == 0 { 0.0 } else { self.h_cdf[i - 1] };
        let frac = t - i as f64;
        (prev + frac * (self.h_cdf[i] - prev)).clamp(0.0, 1.0)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let q = self.cdf(z);
        if self.antitone {
            self.nu.quantile(1.0 - q)
        } else {
            self.nu.quantile(q)
        }
    }
}

/// Hölder exponent `β(n+1) / (2n² + β(n−1))` with `β = 1 − (n+1)/(2p)`;
/// requires `p > (n+1)/2`. `p = f64::INFINITY` gives `β = 1`.
pub fn holder_exponent(n: u32, p: f64) -> Result<f64> {
    let nf = n as f64;
    if !(p > (nf + 1.0) / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "Hölder exponent needs p > (n+1)/2 = {}, got {p}",
            (nf + 1.0) / 2.0
        )));
    }
    let beta = if p.is_infinite() { 1.0 } else { 1.0 - (nf + 1.0) / (2.0 * p) };
    Ok(beta * (nf + 1.0) / (2.0 * nf * nf + beta * (nf - 1.0)))
}

/// The shelf profile used by the discontinuous-density example:
/// `φ(t) = exp(1 − 1/t²)` on `(0, 1)`, zero on `(−1, 0]`. Smooth, flat left of
/// the origin, strictly increasing to `φ(1) = 1`, and analytically invertible.
pub fn shelf_phi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / (t * t)).exp()
    }
}

/// Inverse of [`shelf_phi`] on `(0, 1)`: `φ⁻¹(z) = (1 − ln z)^{−1/2}`.
pub fn shelf_phi_inv(z: f64) -> f64 {
    (1.0 - z.ln()).powf(-0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Domain;
    use approx::assert_abs_diff_eq;

    fn bilinear() -> CostModel {
        CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0)).unwrap()
    }

    fn bilinear_quotient(n: usize) -> (QuotientStructure, SourceMeasure) {
        let cost = bilinear();
        let mu = SourceMeasure::uniform(Domain::unit_square(), n).unwrap();
        let opts = QuotientOptions { z_grid: 128, curve_resolution: 128, ..Default::default() };
        let qs = build_quotient(&cost, &mu, &opts).unwrap();
        (qs, mu)
    }

    #[test]
    fn bilinear_quotient_is_x2() {
        let (qs, _) = bilinear_quotient(100);
        assert_abs_diff_eq!(qs.y0(), 0.5);
        let (zl, zh) = qs.z_range();
        assert!(zl < 0.01 && zh > 0.99);
        assert_abs_diff_eq!(qs.q(Point2::new(0.3, 0.7)), 0.7);
    }

    #[test]
    fn quarter_disk_is_not_c_linear() {
        let cost = CostModel::quarter_disk();
        let mu = SourceMeasure::uniform(Domain::quarter_disk(), 80).unwrap();
        match build_quotient(&cost, &mu, &QuotientOptions::default()) {
            Err(Error::NotCLinear { .. }) => {}
            other => panic!("expected NotCLinear, got {other:?}"),
        }
    }

    #[test]
    fn reduced_cost_formula() {
        let (qs, _) = bilinear_quotient(100);
        // b(z, y) = z (y - 0.5) for c = x2 y with y0 = 0.5.
        for &(z, y) in &[(0.2, 0.9), (0.7, 0.1), (0.5, 0.5)] {
            let b = qs.reduced_cost(z, y).unwrap();
            assert_abs_diff_eq!(b, z * (y - 0.5), epsilon = 1e-7);
        }
        // b(z, y0) = 0.
        assert_abs_diff_eq!(qs.reduced_cost(0.33, 0.5).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn representative_independence() {
        let (qs, _) = bilinear_quotient(100);
        let z = 0.4;
        let r1 = qs.representative_from(Point2::new(0.2, 0.3), z).unwrap();
        let r2 = qs.representative_from(Point2::new(0.8, 0.6), z).unwrap();
        assert_abs_diff_eq!(qs.q(r1), z, epsilon = 1e-8);
        assert_abs_diff_eq!(qs.q(r2), z, epsilon = 1e-8);
        for k in 0..10 {
            let y = 0.05 + 0.09 * k as f64;
            let b1 = qs.cost.eval(r1, y) - qs.cost.eval(r1, 0.5);
            let b2 = qs.cost.eval(r2, y) - qs.cost.eval(r2, 0.5);
            assert_abs_diff_eq!(b1, b2, epsilon = 1e-6);
        }
    }

    #[test]
    fn uniform_density_on_unit_square() {
        let (qs, mu) = bilinear_quotient(200);
        for &z in &[0.1, 0.35, 0.62, 0.9] {
            let h = qs.pushforward_density(&mu, z, 128).unwrap();
            assert_abs_diff_eq!(h, 1.0, epsilon = 0.02);
        }
        // Total mass of the table.
        let dz = (qs.z_max - qs.z_min) / qs.z_grid.len() as f64;
        let total: f64 = qs.h.iter().map(|h| h * dz).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn lp_bound_on_unit_square() {
        let (qs, mu) = bilinear_quotient(200);
        for &p in &[1.0, 2.0, 4.0] {
            let b = qs.lp_bound_check(&mu, p).unwrap();
            assert!(b.pass, "{b:?}");
        }
    }

    #[test]
    fn quantile_solver_on_bilinear() {
        let (qs, _) = bilinear_quotient(100);
        let nu = TargetMeasure::uniform((0.0, 1.0), 1024).unwrap();
        let t = qs.solve_1d(&nu).unwrap();
        // b_zy = 1 > 0: antitone coupling of two uniforms.
        assert!(t.antitone);
        for k in 1..10 {
            let z = k as f64 / 10.0;
            assert_abs_diff_eq!(t.eval(z), 1.0 - z, epsilon = 0.02);
        }
    }

    #[test]
    fn monotone_quantile_cases() {
        // Identical uniform marginals with submodular cost: the identity map.
        let cost = CostModel::builtin("separable_quadratic", Domain::unit_square(), (0.0, 1.0))
            .unwrap();
        let mu = SourceMeasure::uniform(Domain::unit_square(), 150).unwrap();
        let opts = QuotientOptions { z_grid: 128, curve_resolution: 128, ..Default::default() };
        let qs = build_quotient(&cost, &mu, &opts).unwrap();
        // Q(x) = 2(y0 - x1) = 1 - 2 x1 is decreasing in x1, so b_zy = +1 > 0
        // and the z-coupling is antitone — recovering the identity in x1:
        // T(z) = (1 - z)/2 = x1.
        let nu = TargetMeasure::uniform((0.0, 1.0), 1024).unwrap();
        let t = qs.solve_1d(&nu).unwrap();
        assert!(t.antitone);
        for k in 1..10 {
            let z = -0.8 + 1.6 * k as f64 / 10.0;
            assert_abs_diff_eq!(t.eval(z), (1.0 - z) / 2.0, epsilon = 0.02);
        }

        // Shrunk target: T(z) = z/2 for h uniform on [0,1], nu uniform on [0, 1/2].
        let nu_half = TargetMeasure::new((0.0, 1.0), |y| if y <= 0.5 { 1.0 } else { 0.0 }, 2048)
            .unwrap();
        let (qs_b, _) = bilinear_quotient(100);
        let mut t = qs_b.solve_1d(&nu_half).unwrap();
        t.antitone = false; // force the monotone branch for the quantile identity
        for k in 1..10 {
            let z = k as f64 / 10.0;
            assert_abs_diff_eq!(t.eval(z), z / 2.0, epsilon = 0.02);
        }
    }

    #[test]
    fn holder_exponent_arithmetic() {
        assert_abs_diff_eq!(holder_exponent(1, f64::INFINITY).unwrap(), 1.0);
        assert_abs_diff_eq!(holder_exponent(2, f64::INFINITY).unwrap(), 1.0 / 3.0);
        assert!(holder_exponent(1, 1.0).is_err());
    }

    #[test]
    fn shelf_profile_inverts() {
        for k in 1..10 {
            let t = k as f64 / 10.0;
            assert_abs_diff_eq!(shelf_phi_inv(shelf_phi(t)), t, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(shelf_phi_inv(0.5), (1.0 + 2f64.ln()).powf(-0.5), epsilon = 1e-15);
    }
}
