//! Quadrature representations of the marginals: `μ = f(x) dx` on a planar
//! domain (midpoint rule on a uniform grid, normalized to unit mass) and
//! `ν = g(y) dy` on an interval (cumulative table with linear interpolation).

use crate::cost::{Domain, Point2};
use crate::{Error, Result};
use std::sync::Arc;

/// A cell of the source quadrature grid: center and (normalized) mass.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub center: Point2,
    pub mass: f64,
}

/// The planar marginal `μ` on a domain, represented by midpoint quadrature on
/// an N×N grid over the bounding rectangle. Cells whose centers fall outside
/// the membership indicator carry zero mass and are dropped; the remainder is
/// rescaled to total mass one.
#[derive(Clone)]
pub struct SourceMeasure {
    domain: Domain,
    resolution: usize,
    cells: Vec<Cell>,
    cell_area: f64,
    /// Normalization constant: stored density = norm * raw density.
    norm: f64,
    density: Arc<dyn Fn(Point2) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for SourceMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceMeasure")
            .field("resolution", &self.resolution)
            .field("cells", &self.cells.len())
            .finish()
    }
}

impl SourceMeasure {
    pub fn new(
        domain: Domain,
        density: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        resolution: usize,
    ) -> Result<SourceMeasure> {
        assert!(resolution >= 2);
        let density: Arc<dyn Fn(Point2) -> f64 + Send + Sync> = Arc::new(density);
        let r = domain.rect;
        let (dx, dy) = (r.width() / resolution as f64, r.height() / resolution as f64);
        let cell_area = dx * dy;
        let mut cells = Vec::new();
        let mut total = 0.0;
        for i in 0..resolution {
            for j in 0..resolution {
                let p = Point2::new(
                    r.x1_min + (i as f64 + 0.5) * dx,
                    r.x2_min + (j as f64 + 0.5) * dy,
                );
                if !domain.contains(p) {
                    continue;
                }
                let f = density(p);
                if f < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "negative density {f} at ({}, {})",
                        p.x1, p.x2
                    )));
                }
                let mass = f * cell_area;
                if mass > 0.0 {
                    cells.push(Cell { center: p, mass });
                    total += mass;
                }
            }
        }
        if total <= 0.0 {
            return Err(Error::InvalidArgument("source measure has zero mass".into()));
        }
        for c in &mut cells {
            c.mass /= total;
        }
        Ok(SourceMeasure {
            domain,
            resolution,
            cells,
            cell_area,
            norm: 1.0 / total,
            density,
        })
    }

    pub fn uniform(domain: Domain, resolution: usize) -> Result<SourceMeasure> {
        SourceMeasure::new(domain, |_| 1.0, resolution)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    /// Normalized density value at a point (zero outside the indicator).
    pub fn density_at(&self, p: Point2) -> f64 {
        if self.domain.contains(p) {
            self.norm * (self.density)(p)
        } else {
            0.0
        }
    }

    /// Two grid cells of mass; the slack used to discretize strict mass
    /// inequalities.
    pub fn mass_slack(&self) -> f64 {
        2.0 / self.resolution as f64
    }

    /// Sum of cell masses whose centers satisfy the predicate.
    pub fn mass_of_region(&self, region: impl Fn(Point2) -> bool) -> f64 {
        self.cells
            .iter()
            .filter(|c| region(c.center))
            .map(|c| c.mass)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }
}

/// The interval marginal `ν` on `(a, b)`, held as a cumulative table.
#[derive(Debug, Clone)]
pub struct TargetMeasure {
    a: f64,
    b: f64,
    /// cdf[i] = ν([a, a + i·Δ)) at M+1 uniformly spaced nodes, cdf[0] = 0, cdf[M] = 1.
    cdf: Vec<f64>,
}

impl TargetMeasure {
    pub fn new(
        interval: (f64, f64),
        density: impl Fn(f64) -> f64,
        resolution: usize,
    ) -> Result<TargetMeasure> {
        let (a, b) = interval;
        if !(b > a) {
            return Err(Error::InvalidArgument("empty target interval".into()));
        }
        assert!(resolution >= 2);
        let m = resolution;
        let dy = (b - a) / m as f64;
        let mut cdf = Vec::with_capacity(m + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..m {
            let y = a + (i as f64 + 0.5) * dy;
            let g = density(y);
            if g < 0.0 {
                return Err(Error::InvalidArgument(format!("negative density {g} at y={y}")));
            }
            acc += g * dy;
            cdf.push(acc);
        }
        if acc <= 0.0 {
            return Err(Error::InvalidArgument("target measure has zero mass".into()));
        }
        for v in &mut cdf {
            *v /= acc;
        }
        Ok(TargetMeasure { a, b, cdf })
    }

    pub fn uniform(interval: (f64, f64), resolution: usize) -> Result<TargetMeasure> {
        TargetMeasure::new(interval, |_| 1.0, resolution)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `ν([a, y))`, by linear interpolation of the cumulative table.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        let eps = 1e-12 * (self.b - self.a).max(1.0);
        if y < self.a - eps || y > self.b + eps {
            return Err(Error::OutOfDomain(Point2::new(f64::NAN, f64::NAN), y));
        }
        let m = self.cdf.len() - 1;
        let t = ((y - self.a) / (self.b - self.a) * m as f64).clamp(0.0, m as f64);
        let i = (t.floor() as usize).min(m - 1);
        let frac = t - i as f64;
        Ok(self.cdf[i] + frac * (self.cdf[i + 1] - self.cdf[i]))
    }

    /// Least `y` with `cdf(y) >= q`; the exact inverse where the CDF strictly
    /// increases.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let m = self.cdf.len() - 1;
        // First node with cdf >= q.
        let hi = self.cdf.partition_point(|&v| v < q);
        if hi == 0 {
            return self.a;
        }
        let hi = hi.min(m);
        let lo = hi - 1;
        let (c0, c1) = (self.cdf[lo], self.cdf[hi]);
        let frac = if c1 > c0 { (q - c0) / (c1 - c0) } else { 0.0 };
        self.a + (lo as f64 + frac) / m as f64 * (self.b - self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Rect;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn region_masses_on_unit_square() {
        let mu = SourceMeasure::uniform(Domain::unit_square(), 200).unwrap();
        assert_abs_diff_eq!(mu.total_mass(), 1.0, epsilon = 1e-9);
        let half = mu.mass_of_region(|p| p.x1 < 0.5);
        assert_abs_diff_eq!(half, 0.5, epsilon = 2.0 / 200.0);
        assert_abs_diff_eq!(mu.mass_of_region(|_| true), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sector_mass_on_quarter_disk() {
        let mu = SourceMeasure::uniform(Domain::quarter_disk(), 300).unwrap();
        let sector = mu.mass_of_region(|p| p.x2.atan2(p.x1) < FRAC_PI_8);
        assert_abs_diff_eq!(sector, 0.25, epsilon = 2.0 / 300.0);
    }

    #[test]
    fn cdf_and_quantile() {
        let nu = TargetMeasure::uniform((0.0, FRAC_PI_2), 2048).unwrap();
        assert_abs_diff_eq!(nu.cdf(FRAC_PI_4).unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(nu.cdf(0.0).unwrap(), 0.0);
        assert!(nu.cdf(2.0).is_err());

        // Uniform on [0, pi/4] embedded in (0, pi/2), rescaled to unit mass.
        let nu =
            TargetMeasure::new((0.0, FRAC_PI_2), |y| if y <= FRAC_PI_4 { 1.0 } else { 0.0 }, 2048)
                .unwrap();
        assert_abs_diff_eq!(nu.cdf(FRAC_PI_8).unwrap(), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(nu.quantile(0.5), FRAC_PI_8, epsilon = 1e-3);

        let nu = TargetMeasure::uniform((0.0, 1.0), 2048).unwrap();
        assert_abs_diff_eq!(nu.quantile(0.3), 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(nu.quantile(0.0), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf_where_positive() {
        let nu = TargetMeasure::new((0.0, 1.0), |y| 1.0 + y, 512).unwrap();
        for i in 1..20 {
            let y = i as f64 / 20.0;
            let q = nu.cdf(y).unwrap();
            assert_abs_diff_eq!(nu.quantile(q), y, epsilon = 1.0 / 512.0);
        }
    }

    #[test]
    fn mass_monotone_under_implication() {
        let mu = SourceMeasure::uniform(Domain::quarter_disk(), 100).unwrap();
        let small = mu.mass_of_region(|p| p.x1 < 0.3);
        let big = mu.mass_of_region(|p| p.x1 < 0.6);
        assert!(small <= big);
    }

    #[test]
    fn refinement_shrinks_boundary_error() {
        let region = |p: Point2| p.x1 * p.x1 + p.x2 * p.x2 < 0.25;
        let domain = Domain::rectangle(Rect::unit_square());
        let coarse = SourceMeasure::uniform(domain.clone(), 100).unwrap().mass_of_region(region);
        let fine = SourceMeasure::uniform(domain, 200).unwrap().mass_of_region(region);
        let exact = std::f64::consts::PI * 0.25 * 0.25 / 4.0 * 4.0; // quarter circle area in unit square
        assert!((fine - exact).abs() <= (coarse - exact).abs() + 1.0 / 200.0);
    }
}
