//! Level-curve tracing and foliation diagnostics.
//!
//! Level curves `L_x(y) = {x̄ : ∂c/∂y(x̄, y) = ∂c/∂y(x, y)}` are extracted by
//! marching squares with linear interpolation on grid edges, one root-refining
//! corrector per vertex along the edge direction, and clipping to the domain
//! indicator with boundary bisection. Non-degeneracy makes the level value
//! regular, so the contour is a 1-manifold and the extraction converges at
//! O(h²).

use crate::cost::{CostModel, Point2, Rect, Vec2};
use crate::measure::{SourceMeasure, TargetMeasure};
use crate::{Error, Result};
use std::collections::HashMap;

/// A scalar field sampled on the nodes of a uniform grid over a rectangle.
#[derive(Debug, Clone)]
pub struct IsoField {
    rect: Rect,
    /// Cells per side; nodes per side is n + 1.
    n: usize,
    values: Vec<f64>,
}

impl IsoField {
    pub fn sample(rect: Rect, n: usize, f: impl Fn(Point2) -> f64) -> IsoField {
        assert!(n >= 2);
        let mut values = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                values.push(f(Self::node_at(rect, n, i, j)));
            }
        }
        IsoField { rect, n, values }
    }

    fn node_at(rect: Rect, n: usize, i: usize, j: usize) -> Point2 {
        Point2::new(
            rect.x1_min + rect.width() * i as f64 / n as f64,
            rect.x2_min + rect.height() * j as f64 / n as f64,
        )
    }

    fn node(&self, i: usize, j: usize) -> Point2 {
        Self::node_at(self.rect, self.n, i, j)
    }

    fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.n + 1) + i]
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Extracts the isocontour at `level` as a set of polylines.
    ///
    /// `refine`, when given, is the continuous field function; each vertex gets
    /// a bisection corrector along its grid edge. `inside`, when given, clips
    /// the polylines to the indicator with boundary points located by
    /// bisection.
    pub fn trace(
        &self,
        level: f64,
        refine: Option<&dyn Fn(Point2) -> f64>,
        inside: Option<&dyn Fn(Point2) -> bool>,
    ) -> Vec<Vec<Point2>> {
        let n = self.n;
        // Signed values with exact-hit nudge so corners never sit on the level.
        let s = |i: usize, j: usize| -> f64 {
            let d = self.value(i, j) - level;
            if d == 0.0 {
                f64::MIN_POSITIVE
            } else {
                d
            }
        };
        // Edge ids: horizontal edge (i,j)-(i+1,j) -> 2*(j*(n+1)+i),
        // vertical edge (i,j)-(i,j+1) -> 2*(j*(n+1)+i)+1.
        let h_edge = |i: usize, j: usize| 2 * (j * (n + 1) + i);
        let v_edge = |i: usize, j: usize| 2 * (j * (n + 1) + i) + 1;

        let mut points: HashMap<usize, Point2> = HashMap::new();
        let mut segments: Vec<(usize, usize)> = Vec::new();

        let mut crossing = |id: usize, pa: Point2, pb: Point2, sa: f64, sb: f64| {
            points.entry(id).or_insert_with(|| {
                let t = sa / (sa - sb);
                let lin = Point2::new(pa.x1 + t * (pb.x1 - pa.x1), pa.x2 + t * (pb.x2 - pa.x2));
                match refine {
                    Some(f) => refine_on_edge(f, level, pa, pb, lin),
                    None => lin,
                }
            });
        };

        for j in 0..n {
            for i in 0..n {
                let (s00, s10, s11, s01) = (s(i, j), s(i + 1, j), s(i + 1, j + 1), s(i, j + 1));
                let mut edges: Vec<usize> = Vec::with_capacity(4);
                if s00 * s10 < 0.0 {
                    let id = h_edge(i, j);
                    crossing(id, self.node(i, j), self.node(i + 1, j), s00, s10);
                    edges.push(id);
                }
                if s10 * s11 < 0.0 {
                    let id = v_edge(i + 1, j);
                    crossing(id, self.node(i + 1, j), self.node(i + 1, j + 1), s10, s11);
                    edges.push(id);
                }
                if s01 * s11 < 0.0 {
                    let id = h_edge(i, j + 1);
                    crossing(id, self.node(i, j + 1), self.node(i + 1, j + 1), s01, s11);
                    edges.push(id);
                }
                if s00 * s01 < 0.0 {
                    let id = v_edge(i, j);
                    crossing(id, self.node(i, j), self.node(i, j + 1), s00, s01);
                    edges.push(id);
                }
                match edges.len() {
                    0 => {}
                    2 => segments.push((edges[0], edges[1])),
                    4 => {
                        // Saddle: order is bottom, right, top, left. Use the
                        // cell-center average to pick the pairing.
                        let center = 0.25 * (s00 + s10 + s11 + s01);
                        if center * s00 >= 0.0 {
                            // bottom-left corner sign matches the center:
                            // connect bottom-right and top-left.
                            segments.push((edges[0], edges[1]));
                            segments.push((edges[2], edges[3]));
                        } else {
                            segments.push((edges[0], edges[3]));
                            segments.push((edges[1], edges[2]));
                        }
                    }
                    _ => unreachable!("odd crossing count in a cell"),
                }
            }
        }

        let polylines = chain_segments(&segments, &points);
        match inside {
            Some(ind) => polylines
                .into_iter()
                .flat_map(|pl| clip_polyline(&pl, ind))
                .filter(|pl| pl.len() >= 2)
                .collect(),
            None => polylines,
        }
    }
}

fn refine_on_edge(
    f: &dyn Fn(Point2) -> f64,
    level: f64,
    pa: Point2,
    pb: Point2,
    fallback: Point2,
) -> Point2 {
    let g = |t: f64| {
        f(Point2::new(
            pa.x1 + t * (pb.x1 - pa.x1),
            pa.x2 + t * (pb.x2 - pa.x2),
        )) - level
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (glo, ghi) = (g(lo), g(hi));
    if glo * ghi > 0.0 {
        return fallback;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if glo * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Point2::new(pa.x1 + t * (pb.x1 - pa.x1), pa.x2 + t * (pb.x2 - pa.x2))
}

fn chain_segments(segments: &[(usize, usize)], points: &HashMap<usize, Point2>) -> Vec<Vec<Point2>> {
    let mut adj: HashMap<usize, Vec<(usize, usize)>> = HashMap::new(); // edge id -> (segment idx, other end)
    for (k, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push((k, b));
        adj.entry(b).or_default().push((k, a));
    }
    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    // Open chains first (endpoints of degree 1), then closed loops.
    let mut starts: Vec<usize> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(&id, _)| id)
        .collect();
    starts.sort_unstable();
    let mut all_ids: Vec<usize> = adj.keys().copied().collect();
    all_ids.sort_unstable();
    for phase in 0..2 {
        let candidates: &[usize] = if phase == 0 { &starts } else { &all_ids };
        for &start in candidates {
            // Skip if every incident segment is consumed.
            let Some(next) = adj[&start].iter().find(|&&(k, _)| !used[k]) else {
                continue;
            };
            let mut chain = vec![start];
            let (mut seg, mut cur) = *next;
            used[seg] = true;
            chain.push(cur);
            loop {
                let Some(&(k, nxt)) = adj[&cur].iter().find(|&&(k, _)| !used[k]) else {
                    break;
                };
                used[k] = true;
                seg = k;
                let _ = seg;
                cur = nxt;
                chain.push(cur);
            }
            polylines.push(chain.iter().map(|id| points[id]).collect());
        }
    }
    polylines
}

fn clip_polyline(pl: &[Point2], inside: &dyn Fn(Point2) -> bool) -> Vec<Vec<Point2>> {
    let boundary = |pin: Point2, pout: Point2| -> Point2 {
        let (mut lo, mut hi) = (pin, pout);
        for _ in 0..40 {
            let mid = Point2::new(0.5 * (lo.x1 + hi.x1), 0.5 * (lo.x2 + hi.x2));
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let mut pieces = Vec::new();
    let mut piece: Vec<Point2> = Vec::new();
    for w in 0..pl.len() {
        let p = pl[w];
        let pin = inside(p);
        if pin {
            if piece.is_empty() && w > 0 && !inside(pl[w - 1]) {
                piece.push(boundary(p, pl[w - 1]));
            }
            piece.push(p);
        } else if !piece.is_empty() {
            piece.push(boundary(*piece.last().unwrap(), p));
            pieces.push(std::mem::take(&mut piece));
        }
    }
    if !piece.is_empty() {
        pieces.push(piece);
    }
    pieces
}

/// A traced level curve of `x̄ ↦ ∂c/∂y(x̄, y)` through an anchor point.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub anchor: Point2,
    pub y: f64,
    pub level: f64,
    pub polylines: Vec<Vec<Point2>>,
}

impl LevelCurve {
    pub fn connected_components(&self) -> usize {
        self.polylines.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point2> + '_ {
        self.polylines.iter().flatten().copied()
    }

    pub fn total_length(&self) -> f64 {
        self.polylines
            .iter()
            .map(|pl| pl.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>())
            .sum()
    }

    /// Trapezoidal line integral of a vertex weight along the curve.
    pub fn integrate(&self, w: impl Fn(Point2) -> f64) -> f64 {
        self.polylines
            .iter()
            .map(|pl| {
                pl.windows(2)
                    .map(|seg| seg[0].dist(seg[1]) * 0.5 * (w(seg[0]) + w(seg[1])))
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Traces `L_x(y)` on a `resolution × resolution` grid, clipped to the domain.
pub fn trace_level_curve(
    cost: &CostModel,
    x: Point2,
    y: f64,
    resolution: usize,
) -> Result<LevelCurve> {
    let level = cost.dcdy(x, y)?;
    let field = IsoField::sample(cost.domain().rect, resolution, |p| cost.dcdy_unchecked(p, y));
    let refine = |p: Point2| cost.dcdy_unchecked(p, y);
    let domain = cost.domain().clone();
    let inside = move |p: Point2| domain.contains(p);
    let polylines = field.trace(level, Some(&refine), Some(&inside));
    if polylines.iter().all(|pl| pl.len() < 2) {
        return Err(Error::EmptyCurve(level));
    }
    Ok(LevelCurve { anchor: x, y, level, polylines })
}

/// Unit tangent of the level curve at `(x, y)`: orthogonal to `∇_x(∂c/∂y)`,
/// sign-normalized so the first nonzero component is positive.
pub fn tangent_direction(cost: &CostModel, x: Point2, y: f64) -> Result<Vec2> {
    let grad = cost.grad_x_dcdy(x, y)?;
    if grad.norm() < 1e-10 {
        return Err(Error::DegeneratePoint(x, y));
    }
    let mut t = grad.perp().normalized();
    if t.d1 < -1e-12 || (t.d1.abs() <= 1e-12 && t.d2 < 0.0) {
        t = t.scale(-1.0);
    }
    Ok(t)
}

/// Maximum angle (radians) between level-curve tangents at `x` over a y-grid;
/// zero exactly when the target looks c-linear from `x`.
pub fn c_linearity_defect(cost: &CostModel, x: Point2, y_samples: usize) -> Result<f64> {
    assert!(y_samples >= 2);
    let (a, b) = cost.y_range();
    let tangents: Vec<Vec2> = (0..y_samples)
        .map(|k| {
            let y = a + (k as f64 + 0.5) / y_samples as f64 * (b - a);
            tangent_direction(cost, x, y)
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in 0..tangents.len() {
        for j in (i + 1)..tangents.len() {
            let d = tangents[i].dot(tangents[j]).clamp(-1.0, 1.0);
            worst = worst.max(d.acos());
        }
    }
    Ok(worst)
}

/// Verdict of the c-convexity probe at a point.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Max distance of the sampled curve `y ↦ D_x c(x, y)` to its best-fit line.
    pub line_defect: f64,
    /// Whether the 1D parametrization along that line is monotone.
    pub monotone: bool,
}

/// Samples the image curve `y ↦ D_x c(x, y)`; for a one-dimensional target,
/// c-convexity means the image is a straight segment traversed monotonically.
pub fn c_convexity_check(cost: &CostModel, x: Point2, y_samples: usize) -> Result<ConvexityReport> {
    assert!(y_samples >= 3);
    let (a, b) = cost.y_range();
    let pts: Vec<Vec2> = (0..y_samples)
        .map(|k| {
            let y = a + (k as f64 + 0.5) / y_samples as f64 * (b - a);
            cost.grad_x(x, y)
        })
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mean = Vec2::new(
        pts.iter().map(|p| p.d1).sum::<f64>() / n,
        pts.iter().map(|p| p.d2).sum::<f64>() / n,
    );
    // Principal axis of the 2x2 covariance.
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let (dx, dy) = (p.d1 - mean.d1, p.d2 - mean.d2);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let dir = Vec2::new(theta.cos(), theta.sin());
    let normal = dir.perp();
    let mut line_defect = 0.0f64;
    let mut params = Vec::with_capacity(pts.len());
    for p in &pts {
        let d = Vec2::new(p.d1 - mean.d1, p.d2 - mean.d2);
        line_defect = line_defect.max(d.dot(normal).abs());
        params.push(d.dot(dir));
    }
    let increasing = params.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let decreasing = params.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let monotone = increasing || decreasing;
    let tol = 1e-5 * (1.0 + (params.last().unwrap() - params[0]).abs());
    Ok(ConvexityReport { convex: line_defect <= tol && monotone, line_defect, monotone })
}

/// Per-point foliation diagnostics, serializable for reports.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FoliationReport {
    pub point: Point2,
    pub linearity_defect: f64,
    pub convexity: ConvexityReport,
    pub connected: bool,
}

/// Result of the sampled P-set membership test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PsetReport {
    pub member: bool,
    /// Worst signed violation of `∂c/∂y(x̃, y1) ≤ ∂c/∂y(x, y1)` over sampled
    /// pairs `y0 < y1` and vertices `x` of `L_x̃(y0)`; negative means slack.
    pub worst_violation: f64,
    pub pairs_checked: usize,
}

/// Sampled membership test for the monotone-pivot set P: over pairs `y0 < y1`
/// and vertices of the traced curve `L_x̃(y0)`, checks the defining inequality
/// and reports the worst signed violation.
pub fn p_set_membership(
    cost: &CostModel,
    x_tilde: Point2,
    y_pairs: usize,
    curve_resolution: usize,
) -> Result<PsetReport> {
    assert!(y_pairs >= 2);
    let (a, b) = cost.y_range();
    let ys: Vec<f64> = (0..y_pairs)
        .map(|k| a + (k as f64 + 0.5) / y_pairs as f64 * (b - a))
        .collect();
    let mut worst = f64::NEG_INFINITY;
    let mut pairs = 0usize;
    for (i, &y0) in ys.iter().enumerate() {
        let curve = trace_level_curve(cost, x_tilde, y0, curve_resolution)?;
        for &y1 in &ys[i + 1..] {
            let lhs = cost.dcdy_unchecked(x_tilde, y1);
            for v in curve.vertices() {
                worst = worst.max(lhs - cost.dcdy_unchecked(v, y1));
            }
            pairs += 1;
        }
    }
    Ok(PsetReport { member: worst <= 1e-3, worst_violation: worst, pairs_checked: pairs })
}

/// Result of the mass comparison property test on one interval.
#[derive(Debug, Clone, serde::Serialize)]
pub struct McpReport {
    pub holds: bool,
    pub band_mass: f64,
    pub nu_mass: f64,
    pub slack: f64,
}

/// Mass comparison property on `[y0, y1]`: compares the μ-mass of the band
/// swept by `L_x̃(y)` against `ν([y0, y1])`, requiring strict inequality with
/// a two-grid-cell slack.
pub fn mcp_check(
    cost: &CostModel,
    mu: &SourceMeasure,
    nu: &TargetMeasure,
    x_tilde: Point2,
    y0: f64,
    y1: f64,
    y_band_samples: usize,
) -> Result<McpReport> {
    if !(y0 < y1) {
        return Err(Error::InvalidArgument("need y0 < y1".into()));
    }
    assert!(y_band_samples >= 2);
    let ys: Vec<f64> = (0..y_band_samples)
        .map(|k| y0 + k as f64 / (y_band_samples - 1) as f64 * (y1 - y0))
        .collect();
    let ref_vals: Vec<f64> = ys.iter().map(|&y| cost.dcdy_unchecked(x_tilde, y)).collect();
    let band = |p: Point2| {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, &y) in ys.iter().enumerate() {
            let g = cost.dcdy_unchecked(p, y) - ref_vals[k];
            lo = lo.min(g);
            hi = hi.max(g);
            if lo <= 0.0 && hi >= 0.0 {
                return true;
            }
        }
        false
    };
    let band_mass = mu.mass_of_region(band);
    let nu_mass = nu.cdf(y1)? - nu.cdf(y0)?;
    let slack = mu.mass_slack();
    Ok(McpReport { holds: band_mass < nu_mass - slack, band_mass, nu_mass, slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Domain;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn bilinear() -> CostModel {
        CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0)).unwrap()
    }

    fn quarter() -> CostModel {
        CostModel::quarter_disk()
    }

    fn quadratic() -> CostModel {
        CostModel::builtin("separable_quadratic", Domain::unit_square(), (0.0, 1.0)).unwrap()
    }

    fn tilted() -> CostModel {
        // c(x, y) = b(x1 + 2 x2, y) with b(z, y) = z y: c-linear but not axis-aligned.
        CostModel::new("tilted", |p, y| (p.x1 + 2.0 * p.x2) * y, Domain::unit_square(), (0.0, 1.0))
            .with_dcdy(|p, _| p.x1 + 2.0 * p.x2)
            .with_grad_x(|_, y| Vec2::new(y, 2.0 * y))
            .with_grad_x_dcdy(|_, _| Vec2::new(1.0, 2.0))
    }

    #[test]
    fn horizontal_level_line_for_bilinear() {
        let curve = trace_level_curve(&bilinear(), Point2::new(0.3, 0.6), 0.4, 128).unwrap();
        assert_eq!(curve.connected_components(), 1);
        for v in curve.vertices() {
            assert_abs_diff_eq!(v.x2, 0.6, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(curve.total_length(), 1.0, epsilon = 1e-2);
    }

    #[test]
    fn ray_through_origin_for_quarter_disk() {
        let curve = trace_level_curve(&quarter(), Point2::new(0.0, 0.0), 0.6, 256).unwrap();
        assert_eq!(curve.connected_components(), 1);
        for v in curve.vertices() {
            if v.dist(Point2::new(0.0, 0.0)) > 1e-3 {
                assert_abs_diff_eq!(v.x2.atan2(v.x1), 0.6, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn chord_direction_for_quarter_disk() {
        let x = Point2::new(0.5, 0.5);
        let curve = trace_level_curve(&quarter(), x, FRAC_PI_4, 256).unwrap();
        // Level sets of x1 sin y - x2 cos y are lines with direction (cos y, sin y).
        let d = Vec2::new(FRAC_PI_4.cos(), FRAC_PI_4.sin());
        for v in curve.vertices() {
            let off = Vec2::new(v.x1 - x.x1, v.x2 - x.x2);
            let perp = off.dot(d.perp());
            assert!(perp.abs() <= 1e-4, "vertex {v:?} off the chord by {perp}");
        }
    }

    #[test]
    fn vertices_satisfy_level_equation() {
        let cost = quarter();
        let x = Point2::new(0.4, 0.2);
        let y = 0.9;
        let curve = trace_level_curve(&cost, x, y, 128).unwrap();
        let level = cost.dcdy(x, y).unwrap();
        for v in curve.vertices() {
            assert!((cost.dcdy_unchecked(v, y) - level).abs() <= 1e-6);
        }
    }

    #[test]
    fn tangent_examples() {
        let t = tangent_direction(&bilinear(), Point2::new(0.3, 0.3), 0.5).unwrap();
        assert_abs_diff_eq!(t.d1, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d2, 0.0, epsilon = 1e-12);

        let t = tangent_direction(&quarter(), Point2::new(0.4, 0.4), FRAC_PI_3).unwrap();
        assert_abs_diff_eq!(t.d1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d2, 3f64.sqrt() / 2.0, epsilon = 1e-12);

        let t = tangent_direction(&quadratic(), Point2::new(0.5, 0.5), 0.3).unwrap();
        assert_abs_diff_eq!(t.d1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.d2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tangent_is_orthogonal_to_gradient() {
        let cost = quarter();
        for k in 1..10 {
            let y = k as f64 * FRAC_PI_2 / 10.0;
            let x = Point2::new(0.3, 0.5);
            let t = tangent_direction(&cost, x, y).unwrap();
            let g = cost.grad_x_dcdy(x, y).unwrap();
            assert!(t.dot(g).abs() <= 1e-12);
        }
    }

    #[test]
    fn linearity_defects() {
        assert!(c_linearity_defect(&bilinear(), Point2::new(0.5, 0.5), 16).unwrap() <= 1e-6);
        assert!(c_linearity_defect(&tilted(), Point2::new(0.5, 0.5), 16).unwrap() <= 1e-6);

        // Quarter disk: tangent direction is (cos y, sin y), so the spread over
        // a sub-range of y equals the width of the range.
        let narrow = CostModel::builtin("quarter_disk", Domain::quarter_disk(), (0.1, 1.4)).unwrap();
        let defect = c_linearity_defect(&narrow, Point2::new(0.5, 0.5), 64).unwrap();
        assert_abs_diff_eq!(defect, 1.3, epsilon = 0.05);
    }

    #[test]
    fn convexity_verdicts() {
        let r = c_convexity_check(&bilinear(), Point2::new(0.5, 0.5), 32).unwrap();
        assert!(r.convex, "{r:?}");
        let r = c_convexity_check(&quadratic(), Point2::new(0.5, 0.5), 32).unwrap();
        assert!(r.convex, "{r:?}");
        let r = c_convexity_check(&quarter(), Point2::new(0.5, 0.5), 32).unwrap();
        assert!(!r.convex, "circular arc must be rejected: {r:?}");
        // Convexity implies linearity wherever the check passes.
        assert!(c_linearity_defect(&quadratic(), Point2::new(0.5, 0.5), 16).unwrap() <= 1e-6);
    }

    #[test]
    fn p_set_examples() {
        // Level sets independent of y: every point is in P.
        let r = p_set_membership(&bilinear(), Point2::new(0.4, 0.7), 8, 128).unwrap();
        assert!(r.member, "{r:?}");

        let r = p_set_membership(&quarter(), Point2::new(0.0, 0.5), 8, 256).unwrap();
        assert!(r.member, "{r:?}");

        let r = p_set_membership(&quarter(), Point2::new(0.3, 0.3), 8, 256).unwrap();
        assert!(!r.member, "interior points rotate both ways: {r:?}");
    }

    #[test]
    fn mcp_examples() {
        let mu = SourceMeasure::uniform(Domain::unit_square(), 200).unwrap();
        let nu = TargetMeasure::uniform((0.0, 1.0), 512).unwrap();
        // Level sets never move, so the band is the single line x2 = 0.5 with
        // vanishing mass; the interval is wide enough to clear the 2/N slack.
        let r = mcp_check(&bilinear(), &mu, &nu, Point2::new(0.5, 0.5), 0.4, 0.5, 8).unwrap();
        assert!(r.holds, "band around a single line: {r:?}");

        let mu = SourceMeasure::uniform(Domain::quarter_disk(), 200).unwrap();
        let nu = TargetMeasure::uniform((0.0, FRAC_PI_2), 512).unwrap();
        let r = mcp_check(&quarter(), &mu, &nu, Point2::new(0.0, 0.0), 0.3, 0.6, 16).unwrap();
        assert!(!r.holds, "band and target masses coincide at the origin: {r:?}");
        assert!(r.band_mass >= r.nu_mass - r.slack);
    }
}
