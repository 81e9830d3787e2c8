//! The mass-splitting construction of the optimal map for a planar source and
//! interval target: the splitting function
//! `f_x(y) = μ({x̄ : ∂c/∂y(x, y) < ∂c/∂y(x̄, y)}) − ν([a, y))`, its sup-formula
//! root, split-level curves, map fields, and pushforward verification.

use crate::cost::{CostModel, Point2};
use crate::geometry::{IsoField, LevelCurve};
use crate::measure::{SourceMeasure, TargetMeasure};
use crate::{Error, Result};

/// Flags attached to a map evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MapFlag {
    Ok,
    /// `f_x` never rose above the mass slack; clamped to the left endpoint.
    ClampedLow,
    /// `f_x` never dropped to zero; clamped to the right endpoint.
    ClampedHigh,
    /// The scan found more than one sign change.
    NonUniqueBracket,
}

/// One evaluation of the optimal map.
#[derive(Debug, Clone, Copy)]
pub struct MapValue {
    pub y: f64,
    /// `|f_x(y)|` at the returned point.
    pub residual: f64,
    pub flag: MapFlag,
}

/// The 2D → 1D transport problem fed to the splitting construction.
pub struct SplittingProblem {
    cost: CostModel,
    mu: SourceMeasure,
    nu: TargetMeasure,
    y_scan: usize,
    bisect_tol: f64,
}

impl std::fmt::Debug for SplittingProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplittingProblem")
            .field("cost", &self.cost.name())
            .field("y_scan", &self.y_scan)
            .finish()
    }
}

impl SplittingProblem {
    pub fn new(cost: CostModel, mu: SourceMeasure, nu: TargetMeasure) -> SplittingProblem {
        SplittingProblem { cost, mu, nu, y_scan: 256, bisect_tol: 1e-6 }
    }

    pub fn with_y_scan(mut self, n: usize) -> Self {
        assert!(n >= 8);
        self.y_scan = n;
        self
    }

    pub fn with_bisect_tol(mut self, tol: f64) -> Self {
        self.bisect_tol = tol;
        self
    }

    pub fn cost(&self) -> &CostModel {
        &self.cost
    }

    pub fn mu(&self) -> &SourceMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &TargetMeasure {
        &self.nu
    }

    /// μ-mass of `{x̄ : ∂c/∂y(x̄, y) > threshold}`.
    pub fn superlevel_mass(&self, y: f64, threshold: f64) -> f64 {
        self.mu
            .cells()
            .iter()
            .filter(|c| self.cost.dcdy_unchecked(c.center, y) > threshold)
            .map(|c| c.mass)
            .sum()
    }

    /// The splitting function `f_x(y)`; its zero is the mass-splitting level.
    pub fn splitting_function(&self, x: Point2, y: f64) -> Result<f64> {
        let threshold = self.cost.dcdy_unchecked(x, y);
        Ok(self.superlevel_mass(y, threshold) - self.nu.cdf(y)?)
    }

    /// The sup-formula optimal map at one point: a coarse scan for the last
    /// `y` with `f_x(y)` above the mass slack, refined by bisection on the
    /// sign of `f_x`.
    pub fn optimal_map(&self, x: Point2) -> MapValue {
        let (a, b) = self.cost.y_range();
        let n = self.y_scan;
        let ys: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let fs: Vec<f64> = ys
            .iter()
            .map(|&y| self.splitting_function(x, y).unwrap_or(f64::NAN))
            .collect();
        self.refine_from_scan(x, &ys, &fs, false)
    }

    /// Refines the root of `f_x` from its scan values. With `interpolate`,
    /// the root comes from a secant step inside the bracket (no further
    /// quadrature passes except the final residual); otherwise bisection runs
    /// down to `bisect_tol`.
    fn refine_from_scan(&self, x: Point2, ys: &[f64], fs: &[f64], interpolate: bool) -> MapValue {
        let (a, b) = self.cost.y_range();
        let eps = self.mu.mass_slack();
        let n = ys.len() - 1;
        let last_pos = (0..=n).rev().find(|&k| fs[k] > eps);
        let Some(j) = last_pos else {
            // Never exceeded the slack: clamp left.
            let residual = fs[0].abs();
            return MapValue { y: a, residual, flag: MapFlag::ClampedLow };
        };
        // Number of +/- transitions above/below zero along the scan.
        let mut transitions = 0usize;
        let mut prev_pos = fs[0] > 0.0;
        for &f in &fs[1..] {
            let pos = f > 0.0;
            if prev_pos && !pos {
                transitions += 1;
            }
            prev_pos = pos;
        }
        let flag = if transitions > 1 { MapFlag::NonUniqueBracket } else { MapFlag::Ok };
        // First non-positive value right of j closes the bracket.
        let Some(k) = ((j + 1)..=n).find(|&k| fs[k] <= 0.0) else {
            let residual = fs[n].abs();
            return MapValue { y: b, residual, flag: MapFlag::ClampedHigh };
        };
        let (mut lo, mut hi) = (ys[k - 1], ys[k]);
        if interpolate {
            let (flo, fhi) = (fs[k - 1], fs[k]);
            let y = if flo > fhi { lo + (hi - lo) * flo / (flo - fhi) } else { 0.5 * (lo + hi) };
            let residual = self.splitting_function(x, y).map(|f| f.abs()).unwrap_or(f64::NAN);
            return MapValue { y, residual, flag };
        }
        while hi - lo > self.bisect_tol {
            let mid = 0.5 * (lo + hi);
            match self.splitting_function(x, mid) {
                Ok(f) if f > 0.0 => lo = mid,
                Ok(_) => hi = mid,
                Err(_) => break,
            }
        }
        let y = 0.5 * (lo + hi);
        let residual = self.splitting_function(x, y).map(|f| f.abs()).unwrap_or(f64::NAN);
        MapValue { y, residual, flag }
    }

    /// The level `λ` whose superlevel set carries exactly the mass `ν([a, y))`,
    /// together with the traced splitting level curve at that level.
    pub fn split_level(&self, y: f64, curve_resolution: usize) -> Result<(f64, LevelCurve)> {
        let target = self.nu.cdf(y)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in self.mu.cells() {
            let v = self.cost.dcdy_unchecked(c.center, y);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        // superlevel_mass decreases in the threshold.
        let (mut llo, mut lhi) = (lo - 1e-9, hi + 1e-9);
        for _ in 0..60 {
            let mid = 0.5 * (llo + lhi);
            if self.superlevel_mass(y, mid) > target {
                llo = mid;
            } else {
                lhi = mid;
            }
        }
        let lambda = 0.5 * (llo + lhi);
        let cost = &self.cost;
        let q = |p: Point2| cost.dcdy_unchecked(p, y);
        let field = IsoField::sample(cost.domain().rect, curve_resolution, q);
        let domain = cost.domain().clone();
        let inside = move |p: Point2| domain.contains(p);
        let polylines = field.trace(lambda, Some(&q), Some(&inside));
        let anchor = polylines
            .iter()
            .flatten()
            .next()
            .copied()
            .unwrap_or_else(|| cost.domain().rect.center());
        Ok((lambda, LevelCurve { anchor, y, level: lambda, polylines }))
    }

    /// Batched map evaluation: the scan stage is shared across the given
    /// points — for each scan level `y` the cell values of `∂c/∂y(·, y)` are
    /// sorted once, making each superlevel query a binary search — and the
    /// root is refined by a secant step inside the bracket plus one residual
    /// pass per point.
    pub fn map_at_points(&self, points: &[Point2]) -> Vec<MapValue> {
        let (a, b) = self.cost.y_range();
        let n = self.y_scan;
        let ys: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
        let mut fs = vec![0.0f64; points.len() * (n + 1)];
        let mut values = Vec::with_capacity(self.mu.cells().len());
        for (k, &y) in ys.iter().enumerate() {
            // Sorted cell values with suffix masses at this scan level.
            values.clear();
            values.extend(
                self.mu
                    .cells()
                    .iter()
                    .map(|c| (self.cost.dcdy_unchecked(c.center, y), c.mass)),
            );
            values.sort_by(|p, q| p.0.total_cmp(&q.0));
            let mut suffix = vec![0.0f64; values.len() + 1];
            for i in (0..values.len()).rev() {
                suffix[i] = suffix[i + 1] + values[i].1;
            }
            let nu_y = self.nu.cdf(y).unwrap_or(f64::NAN);
            for (pi, &p) in points.iter().enumerate() {
                let threshold = self.cost.dcdy_unchecked(p, y);
                let pos = values.partition_point(|&(v, _)| v <= threshold);
                fs[pi * (n + 1) + k] = suffix[pos] - nu_y;
            }
        }
        points
            .iter()
            .enumerate()
            .map(|(pi, &p)| {
                self.refine_from_scan(p, &ys, &fs[pi * (n + 1)..(pi + 1) * (n + 1)], true)
            })
            .collect()
    }

    /// Evaluates the optimal map over an interior grid, recording residuals,
    /// flags, and the discrete modulus of continuity over adjacent pairs.
    pub fn map_field(&self, grid_n: usize) -> MapField {
        let r = self.cost.domain().rect;

        // Interior evaluation points.
        let mut index = vec![usize::MAX; grid_n * grid_n];
        let mut points = Vec::new();
        for i in 0..grid_n {
            for j in 0..grid_n {
                let p = Point2::new(
                    r.x1_min + (i as f64 + 0.5) / grid_n as f64 * r.width(),
                    r.x2_min + (j as f64 + 0.5) / grid_n as f64 * r.height(),
                );
                if self.cost.domain().contains(p) {
                    index[i * grid_n + j] = points.len();
                    points.push(p);
                }
            }
        }

        let evals = self.map_at_points(&points);

        // Discrete modulus of continuity over adjacent retained grid pairs.
        let mut modulus = 0.0f64;
        for i in 0..grid_n {
            for j in 0..grid_n {
                let here = index[i * grid_n + j];
                if here == usize::MAX {
                    continue;
                }
                for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                    if ni >= grid_n || nj >= grid_n {
                        continue;
                    }
                    let there = index[ni * grid_n + nj];
                    if there != usize::MAX {
                        modulus = modulus.max((evals[here].y - evals[there].y).abs());
                    }
                }
            }
        }

        MapField { grid_n, points, evals, modulus }
    }

    /// Kolmogorov–Smirnov distance between the μ-weighted empirical CDF of the
    /// field's map values and the target CDF.
    pub fn verify_pushforward(&self, field: &MapField) -> Result<f64> {
        let mut weighted: Vec<(f64, f64)> = field
            .points
            .iter()
            .zip(&field.evals)
            .map(|(&p, e)| (e.y, self.mu.density_at(p)))
            .collect();
        let total: f64 = weighted.iter().map(|w| w.1).sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("field carries no mass".into()));
        }
        for w in &mut weighted {
            w.1 /= total;
        }
        weighted.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut acc = 0.0;
        let mut ks = 0.0f64;
        for &(y, w) in &weighted {
            let target = self.nu.cdf(y)?;
            ks = ks.max((acc - target).abs());
            acc += w;
            ks = ks.max((acc - target).abs());
        }
        Ok(ks)
    }
}

/// The optimal map evaluated over a grid.
#[derive(Debug, Clone)]
pub struct MapField {
    pub grid_n: usize,
    pub points: Vec<Point2>,
    pub evals: Vec<MapValue>,
    /// Max |F(x) - F(x')| over adjacent retained grid pairs.
    pub modulus: f64,
}

impl MapField {
    pub fn value_at_index(&self, i: usize) -> f64 {
        self.evals[i].y
    }

    pub fn unflagged(&self) -> impl Iterator<Item = (Point2, &MapValue)> + '_ {
        self.points
            .iter()
            .zip(&self.evals)
            .filter(|(_, e)| e.flag == MapFlag::Ok)
            .map(|(&p, e)| (p, e))
    }
}
