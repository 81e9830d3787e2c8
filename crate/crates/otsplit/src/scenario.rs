//! Named end-to-end experiments: each scenario wires a cost, two marginals,
//! and a set of named checks (diagnostics → quotient → splitting → oracle →
//! cross-validation), and emits CSV/JSON artifacts under
//! `<outdir>/<scenario>/`.

use crate::cost::{CostModel, Domain, MtwQuery, Point2, Vec2};
use crate::geometry::{c_convexity_check, c_linearity_defect, mcp_check};
use crate::measure::{SourceMeasure, TargetMeasure};
use crate::oracle::{
    barycentric_map, c_monotonicity_check, solve_kantorovich, DiscreteProblem, Plan,
};
use crate::quotient::{build_quotient, holder_exponent, QuotientOptions, QuotientStructure};
use crate::splitting::{MapField, MapFlag, SplittingProblem};
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

pub const SCENARIOS: [&str; 5] = [
    "bilinear",
    "shelf",
    "quarter_disk_full",
    "quarter_disk_quarter",
    "separable_quadratic",
];

/// The pipeline stage a check belongs to; stages run in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Stage {
    Diagnose,
    Quotient,
    Split,
    Oracle,
    Compare,
}

impl Stage {
    pub const ALL: [Stage; 5] =
        [Stage::Diagnose, Stage::Quotient, Stage::Split, Stage::Oracle, Stage::Compare];
}

/// Resolutions, seeds, and output selection for one scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub out_dir: Option<PathBuf>,
    pub json_only: bool,
    pub seed: u64,
    /// Source quadrature N (N×N bounding grid).
    pub grid_n: usize,
    /// Target cumulative-table resolution.
    pub target_m: usize,
    /// Level-curve tracing resolution.
    pub curve_resolution: usize,
    /// Z grid for the quotient density.
    pub z_grid: usize,
    /// Scan resolution of the splitting sup-formula.
    pub y_scan: usize,
    /// Evaluation grid of the map field.
    pub map_grid: usize,
    pub oracle_nx: usize,
    pub oracle_ny: usize,
    /// Check-name filter; empty runs every check of the selected stages.
    pub checks: Vec<String>,
    pub stages: Vec<Stage>,
}

impl ScenarioConfig {
    pub fn new(scenario: &str) -> ScenarioConfig {
        ScenarioConfig {
            scenario: scenario.to_string(),
            out_dir: None,
            json_only: false,
            seed: 0,
            grid_n: 400,
            target_m: 2048,
            curve_resolution: 512,
            z_grid: 512,
            y_scan: 256,
            map_grid: 30,
            oracle_nx: 30,
            oracle_ny: 60,
            checks: Vec::new(),
            stages: Stage::ALL.to_vec(),
        }
    }

    /// Loads overrides from a key-value config file (TOML sections).
    pub fn apply_file(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        let file: FileConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(s) = file.scenario {
            self.scenario = s;
        }
        if let Some(s) = file.seed {
            self.seed = s;
        }
        if let Some(c) = file.checks {
            self.checks = c;
        }
        if let Some(o) = file.output {
            if let Some(d) = o.dir {
                self.out_dir = Some(PathBuf::from(d));
            }
            if let Some(j) = o.json_only {
                self.json_only = j;
            }
        }
        if let Some(r) = file.resolutions {
            macro_rules! take {
                ($f:ident) => {
                    if let Some(v) = r.$f {
                        self.$f = v;
                    }
                };
            }
            take!(grid_n);
            take!(target_m);
            take!(curve_resolution);
            take!(z_grid);
            take!(y_scan);
            take!(map_grid);
            take!(oracle_nx);
            take!(oracle_ny);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !SCENARIOS.contains(&self.scenario.as_str()) {
            return Err(Error::Config(format!(
                "unknown scenario '{}'; known: {}",
                self.scenario,
                SCENARIOS.join(", ")
            )));
        }
        let mins = [
            (self.grid_n, 16, "grid_n"),
            (self.target_m, 16, "target_m"),
            (self.curve_resolution, 16, "curve_resolution"),
            (self.z_grid, 16, "z_grid"),
            (self.y_scan, 8, "y_scan"),
            (self.map_grid, 4, "map_grid"),
            (self.oracle_nx, 2, "oracle_nx"),
            (self.oracle_ny, 2, "oracle_ny"),
        ];
        for (v, min, name) in mins {
            if v < min {
                return Err(Error::Config(format!("{name} = {v} below minimum {min}")));
            }
        }
        Ok(())
    }
}

#[derive(serde::Deserialize)]
struct FileConfig {
    scenario: Option<String>,
    seed: Option<u64>,
    checks: Option<Vec<String>>,
    output: Option<OutputSection>,
    resolutions: Option<ResolutionSection>,
}

#[derive(serde::Deserialize)]
struct OutputSection {
    dir: Option<String>,
    json_only: Option<bool>,
}

#[derive(serde::Deserialize)]
struct ResolutionSection {
    grid_n: Option<usize>,
    target_m: Option<usize>,
    curve_resolution: Option<usize>,
    z_grid: Option<usize>,
    y_scan: Option<usize>,
    map_grid: Option<usize>,
    oracle_nx: Option<usize>,
    oracle_ny: Option<usize>,
}

/// One executed check: the measured quantity against its threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub stage: Stage,
    pub pass: bool,
    pub measured: f64,
    /// Threshold or target the measurement is compared against.
    pub expected: f64,
    pub tolerance: f64,
    pub seconds: f64,
    pub detail: String,
}

/// The report of one scenario run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Outcome {
    measured: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
    detail: String,
}

impl Outcome {
    /// Pass iff `measured ≤ bound`.
    fn at_most(measured: f64, bound: f64) -> Outcome {
        Outcome {
            measured,
            expected: bound,
            tolerance: bound,
            pass: measured <= bound,
            detail: String::new(),
        }
    }

    /// Pass iff `measured ≥ bound`.
    fn at_least(measured: f64, bound: f64) -> Outcome {
        Outcome {
            measured,
            expected: bound,
            tolerance: bound,
            pass: measured >= bound,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Outcome {
        self.detail = detail.into();
        self
    }
}

/// Runs a configured scenario: executes the selected checks in stage order
/// and writes the artifact files when an output directory is set.
pub fn run(cfg: &ScenarioConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut runner = Runner::build(cfg)?;
    let mut plan: Vec<(&'static str, Stage)> = check_plan(&cfg.scenario);
    plan.retain(|(name, stage)| {
        cfg.stages.contains(stage)
            && (cfg.checks.is_empty() || cfg.checks.iter().any(|c| c == name))
    });
    plan.sort_by_key(|&(_, stage)| stage);

    let mut checks = Vec::new();
    for (name, stage) in plan {
        let start = Instant::now();
        let outcome = runner.execute(name);
        let seconds = start.elapsed().as_secs_f64();
        let result = match outcome {
            Ok(o) => CheckResult {
                name: name.to_string(),
                stage,
                pass: o.pass,
                measured: o.measured,
                expected: o.expected,
                tolerance: o.tolerance,
                seconds,
                detail: o.detail,
            },
            Err(e) => CheckResult {
                name: name.to_string(),
                stage,
                pass: false,
                measured: f64::NAN,
                expected: f64::NAN,
                tolerance: f64::NAN,
                seconds,
                detail: format!("error: {e}"),
            },
        };
        checks.push(result);
    }

    let mut report =
        RunReport { scenario: cfg.scenario.clone(), seed: cfg.seed, checks, artifacts: Vec::new() };
    if cfg.out_dir.is_some() {
        runner.write_artifacts(&mut report)?;
    }
    Ok(report)
}

/// The checks registered for each scenario.
fn check_plan(scenario: &str) -> Vec<(&'static str, Stage)> {
    use Stage::*;
    match scenario {
        "bilinear" => vec![
            ("a2_nondegeneracy", Diagnose),
            ("c_linearity", Diagnose),
            ("mtw_zero", Diagnose),
            ("lp_bound_p1", Quotient),
            ("lp_bound_p2", Quotient),
            ("lp_bound_p4", Quotient),
            ("holder_exponent", Quotient),
            ("ks_pushforward", Split),
            ("lipschitz_modulus", Split),
            ("uniqueness_scan", Split),
            ("lp_certificates", Oracle),
            ("c_monotone", Oracle),
            ("oracle_vs_splitting", Compare),
            ("factorization", Compare),
        ],
        "shelf" => vec![
            ("c_linearity", Diagnose),
            ("mtw_tangent", Diagnose),
            ("shelf_density_profile", Quotient),
            ("shelf_density_jump", Quotient),
            ("lp_bound_p1", Quotient),
            ("lp_bound_p2", Quotient),
            ("lp_bound_p4", Quotient),
        ],
        "quarter_disk_full" => vec![
            ("a2_nondegeneracy", Diagnose),
            ("c_convexity_rejected", Diagnose),
            ("mcp_fails_at_origin", Diagnose),
            ("map_formula", Split),
            ("discontinuity_gap", Split),
            ("ks_pushforward", Split),
            ("lp_certificates", Oracle),
            ("c_monotone", Oracle),
            ("oracle_vs_splitting", Compare),
        ],
        "quarter_disk_quarter" => vec![
            ("mcp_holds_interior", Diagnose),
            ("ks_pushforward", Split),
            ("uniqueness_scan", Split),
            ("lp_certificates", Oracle),
            ("c_monotone", Oracle),
        ],
        "separable_quadratic" => vec![
            ("c_linearity", Diagnose),
            ("mtw_tangent", Diagnose),
            ("ks_pushforward", Split),
            ("lp_certificates", Oracle),
            ("c_monotone", Oracle),
            ("oracle_vs_splitting", Compare),
        ],
        _ => Vec::new(),
    }
}

/// Lazily materialized scenario state shared across checks.
struct Runner<'c> {
    cfg: &'c ScenarioConfig,
    cost: CostModel,
    mu: SourceMeasure,
    nu: TargetMeasure,
    reference: Option<Arc<dyn Fn(Point2) -> f64>>,
    sp: SplittingProblem,
    field: Option<MapField>,
    quotient: Option<QuotientStructure>,
    oracle: Option<(DiscreteProblem, Plan)>,
}

impl<'c> Runner<'c> {
    fn build(cfg: &'c ScenarioConfig) -> Result<Runner<'c>> {
        let (cost, nu, reference): (CostModel, TargetMeasure, Option<Arc<dyn Fn(Point2) -> f64>>) =
            match cfg.scenario.as_str() {
                "bilinear" => (
                    CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0))?,
                    TargetMeasure::uniform((0.0, 1.0), cfg.target_m)?,
                    Some(Arc::new(|p: Point2| 1.0 - p.x2)),
                ),
                "shelf" => (
                    CostModel::builtin(
                        "bilinear",
                        Domain::shelf(crate::quotient::shelf_phi),
                        (0.0, 1.0),
                    )?,
                    TargetMeasure::uniform((0.0, 1.0), cfg.target_m)?,
                    None,
                ),
                "quarter_disk_full" => (
                    CostModel::quarter_disk(),
                    TargetMeasure::uniform((0.0, FRAC_PI_2), cfg.target_m)?,
                    Some(Arc::new(|p: Point2| p.x2.atan2(p.x1))),
                ),
                "quarter_disk_quarter" => (
                    CostModel::quarter_disk(),
                    TargetMeasure::new(
                        (0.0, FRAC_PI_2),
                        |y| if y <= FRAC_PI_4 { 1.0 } else { 0.0 },
                        cfg.target_m,
                    )?,
                    None,
                ),
                "separable_quadratic" => (
                    CostModel::builtin("separable_quadratic", Domain::unit_square(), (0.0, 1.0))?,
                    TargetMeasure::uniform((0.0, 1.0), cfg.target_m)?,
                    Some(Arc::new(|p: Point2| p.x1)),
                ),
                other => return Err(Error::Config(format!("unknown scenario '{other}'"))),
            };
        let mu = SourceMeasure::uniform(cost.domain().clone(), cfg.grid_n)?;
        let sp = SplittingProblem::new(cost.clone(), mu.clone(), nu.clone())
            .with_y_scan(cfg.y_scan);
        Ok(Runner {
            cfg,
            cost,
            mu,
            nu,
            reference,
            sp,
            field: None,
            quotient: None,
            oracle: None,
        })
    }

    fn field(&mut self) -> &MapField {
        if self.field.is_none() {
            self.field = Some(self.sp.map_field(self.cfg.map_grid));
        }
        self.field.as_ref().unwrap()
    }

    fn quotient(&mut self) -> Result<&QuotientStructure> {
        if self.quotient.is_none() {
            let opts = QuotientOptions {
                z_grid: self.cfg.z_grid,
                curve_resolution: self.cfg.curve_resolution,
                ..Default::default()
            };
            self.quotient = Some(build_quotient(&self.cost, &self.mu, &opts)?);
        }
        Ok(self.quotient.as_ref().unwrap())
    }

    fn oracle(&mut self) -> Result<&(DiscreteProblem, Plan)> {
        if self.oracle.is_none() {
            let dp = DiscreteProblem::discretize(
                &self.cost,
                |_| 1.0,
                &self.nu,
                self.cfg.oracle_nx,
                self.cfg.oracle_ny,
            )?;
            let plan = solve_kantorovich(&dp)?;
            self.oracle = Some((dp, plan));
        }
        Ok(self.oracle.as_ref().unwrap())
    }

    /// Interior sample points for diagnostics, seeded from the config.
    fn sample_points(&self, count: usize, tag: u64) -> Vec<Point2> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ tag);
        let r = self.cost.domain().rect;
        let mut pts = Vec::with_capacity(count);
        let margin = 0.02;
        while pts.len() < count {
            let p = Point2::new(
                r.x1_min + r.width() * rng.gen_range(margin..1.0 - margin),
                r.x2_min + r.height() * rng.gen_range(margin..1.0 - margin),
            );
            if self.cost.domain().contains(p) {
                pts.push(p);
            }
        }
        pts
    }

    fn execute(&mut self, name: &str) -> Result<Outcome> {
        match name {
            "a2_nondegeneracy" => {
                let rep = self.cost.check_a2(24);
                Ok(Outcome {
                    measured: rep.min_value,
                    expected: 0.0,
                    tolerance: 0.0,
                    pass: rep.pass,
                    detail: rep.notes,
                })
            }
            "c_linearity" => {
                let mut worst = 0.0f64;
                for p in self.sample_points(8, 0x11) {
                    worst = worst.max(c_linearity_defect(&self.cost, p, 9)?);
                }
                Ok(Outcome::at_most(worst, 1e-6))
            }
            "c_convexity_rejected" => {
                let rep = c_convexity_check(&self.cost, Point2::new(0.5, 0.3), 17)?;
                Ok(Outcome {
                    measured: rep.line_defect,
                    expected: 1e-5,
                    tolerance: 1e-5,
                    pass: !rep.convex,
                    detail: format!("convex = {}", rep.convex),
                })
            }
            "mtw_zero" => {
                let worst = self.max_abs_mtw(false, 100)?;
                Ok(Outcome::at_most(worst, 1e-4))
            }
            "mtw_tangent" => {
                let worst = self.max_abs_mtw(true, 100)?;
                Ok(Outcome::at_most(worst, 1e-4))
            }
            "mcp_fails_at_origin" => {
                let rep = mcp_check(
                    &self.cost,
                    &self.mu,
                    &self.nu,
                    Point2::new(0.0, 0.0),
                    0.3,
                    0.6,
                    33,
                )?;
                Ok(Outcome {
                    measured: rep.band_mass,
                    expected: rep.nu_mass - rep.slack,
                    tolerance: rep.slack,
                    pass: !rep.holds,
                    detail: format!("band {} vs nu {}", rep.band_mass, rep.nu_mass),
                })
            }
            "mcp_holds_interior" => {
                let mut worst_margin = f64::INFINITY;
                let mut all_hold = true;
                for (y0, y1) in [(0.1, 0.3), (0.25, 0.45), (0.45, 0.7)] {
                    let rep = mcp_check(
                        &self.cost,
                        &self.mu,
                        &self.nu,
                        Point2::new(0.0, 0.5),
                        y0,
                        y1,
                        33,
                    )?;
                    worst_margin = worst_margin.min(rep.nu_mass - rep.slack - rep.band_mass);
                    all_hold &= rep.holds;
                }
                Ok(Outcome {
                    measured: worst_margin,
                    expected: 0.0,
                    tolerance: 0.0,
                    pass: all_hold,
                    detail: "margin = nu - slack - band over sampled subintervals".into(),
                })
            }
            "lp_bound_p1" | "lp_bound_p2" | "lp_bound_p4" => {
                let p = name.trim_start_matches("lp_bound_p").parse::<f64>().unwrap();
                let mu = self.mu.clone();
                let b = self.quotient()?.lp_bound_check(&mu, p)?;
                Ok(Outcome {
                    measured: b.lhs,
                    expected: b.rhs,
                    tolerance: 0.05 * b.rhs.abs(),
                    pass: b.pass,
                    detail: format!("p = {p}"),
                })
            }
            "holder_exponent" => {
                let err = (holder_exponent(1, f64::INFINITY)? - 1.0).abs()
                    + (holder_exponent(2, f64::INFINITY)? - 1.0 / 3.0).abs();
                Ok(Outcome::at_most(err, 0.0))
            }
            "shelf_density_profile" => {
                let mu = self.mu.clone();
                let k = mu.density_at(Point2::new(0.5, -0.5));
                let qs = self.quotient()?;
                let mut worst = 0.0f64;
                let mut z = -0.9f64;
                while z <= 0.9 + 1e-12 {
                    if z.abs() >= 0.05 {
                        let expected = if z < 0.0 {
                            2.0 * k
                        } else {
                            k * (1.0 - crate::quotient::shelf_phi_inv(z))
                        };
                        worst = worst.max((qs.density(z) - expected).abs() / expected);
                    }
                    z += 0.01;
                }
                Ok(Outcome::at_most(worst, 0.02).with_detail("max relative error"))
            }
            "shelf_density_jump" => {
                let mu = self.mu.clone();
                let k = mu.density_at(Point2::new(0.5, -0.5));
                let qs = self.quotient()?;
                let jump = qs.density(-0.05) - qs.density(0.05);
                Ok(Outcome::at_least(jump / k, 0.8).with_detail("jump in units of k"))
            }
            "ks_pushforward" => {
                let field = self.field.take().unwrap_or_else(|| self.sp.map_field(self.cfg.map_grid));
                let ks = self.sp.verify_pushforward(&field)?;
                self.field = Some(field);
                Ok(Outcome::at_most(ks, 0.02))
            }
            "lipschitz_modulus" => {
                let bound = {
                    let (a, b) = self.cost.y_range();
                    3.0 * (b - a) / self.cfg.map_grid as f64
                };
                let modulus = self.field().modulus;
                Ok(Outcome::at_most(modulus, bound))
            }
            "uniqueness_scan" => {
                let field = self.field();
                let flagged = field
                    .evals
                    .iter()
                    .filter(|e| e.flag == MapFlag::NonUniqueBracket)
                    .count();
                let fraction = flagged as f64 / field.evals.len() as f64;
                Ok(Outcome::at_most(fraction, 0.01)
                    .with_detail(format!("{flagged}/{} multi-bracket points", field.evals.len())))
            }
            "map_formula" => {
                let reference = self.reference.clone().ok_or_else(|| {
                    Error::Config("scenario has no reference map".into())
                })?;
                let field = self.field();
                let mut worst = 0.0f64;
                for (p, e) in field.points.iter().zip(&field.evals) {
                    if p.dist(Point2::new(0.0, 0.0)) >= 0.1 {
                        worst = worst.max((e.y - reference(*p)).abs());
                    }
                }
                Ok(Outcome::at_most(worst, 0.02))
            }
            "discontinuity_gap" => {
                let pts = [Point2::new(1e-3, 0.05), Point2::new(0.05, 1e-3)];
                let vals = self.sp.map_at_points(&pts);
                Ok(Outcome::at_least(vals[0].y - vals[1].y, 1.4))
            }
            "lp_certificates" => {
                let (_, plan) = self.oracle()?;
                let worst = plan.dual_feasibility.max(plan.complementary_slackness);
                Ok(Outcome::at_most(worst, 1e-7)
                    .with_detail(format!("{} pivots", plan.pivots)))
            }
            "c_monotone" => {
                let seed = self.cfg.seed;
                let (dp, plan) = self.oracle()?;
                let rep = c_monotonicity_check(plan, dp, 10_000, seed ^ 0x6D);
                Ok(Outcome::at_most(rep.worst_violation, 1e-9))
            }
            "oracle_vs_splitting" => {
                let tol = if self.cfg.scenario == "separable_quadratic" { 0.02 } else { 0.05 };
                self.oracle()?;
                self.field();
                let (dp, plan) = self.oracle.as_ref().unwrap();
                let field = self.field.as_ref().unwrap();
                let bary = barycentric_map(plan, dp);
                // Match oracle atoms to their nearest field grid point.
                let cell = field_spacing(field);
                let mut acc = 0.0;
                let mut mass = 0.0;
                for (i, &x) in dp.sources.iter().enumerate() {
                    if !bary.values[i].is_finite() {
                        continue;
                    }
                    let mut best = (f64::INFINITY, 0usize);
                    for (k, &p) in field.points.iter().enumerate() {
                        let d = x.dist(p);
                        if d < best.0 {
                            best = (d, k);
                        }
                    }
                    if best.0 <= 0.51 * cell {
                        acc += dp.source_mass[i] * (bary.values[i] - field.evals[best.1].y).abs();
                        mass += dp.source_mass[i];
                    }
                }
                if mass <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "no oracle atoms matched the map field".into(),
                    ));
                }
                Ok(Outcome::at_most(acc / mass, tol).with_detail("mu-weighted L1"))
            }
            "factorization" => {
                let pts = self.sample_points(100, 0xFAC);
                let vals = self.sp.map_at_points(&pts);
                let nu = self.nu.clone();
                let qs = self.quotient()?;
                let t = qs.solve_1d(&nu)?;
                let mut worst = 0.0f64;
                for (p, v) in pts.iter().zip(&vals) {
                    worst = worst.max((t.eval(qs.q(*p)) - v.y).abs());
                }
                Ok(Outcome::at_most(worst, 0.01))
            }
            other => Err(Error::Config(format!("unknown check '{other}'"))),
        }
    }

    /// Max |MTW| over admissible random queries; `u` is either a random unit
    /// vector or the level-curve tangent at the sample point.
    fn max_abs_mtw(&self, tangent_u: bool, samples: usize) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x347);
        let r = self.cost.domain().rect;
        let (a, b) = self.cost.y_range();
        let mut worst = 0.0f64;
        let mut used = 0usize;
        let mut attempts = 0usize;
        while used < samples {
            attempts += 1;
            if attempts > 200 * samples {
                return Err(Error::InvalidArgument(
                    "could not find enough admissible curvature queries".into(),
                ));
            }
            let x = Point2::new(
                r.x1_min + r.width() * rng.gen_range(0.1..0.9),
                r.x2_min + r.height() * rng.gen_range(0.1..0.9),
            );
            if !self.cost.domain().contains(x) {
                continue;
            }
            let y = a + (b - a) * rng.gen_range(0.2..0.8);
            let u = if tangent_u {
                match self.cost.grad_x_dcdy(x, y) {
                    Ok(g) if g.norm() > 1e-10 => g.perp(),
                    _ => continue,
                }
            } else {
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                Vec2::new(angle.cos(), angle.sin())
            };
            let v = rng.gen_range(0.2..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            match self.cost.mtw_curvature(&MtwQuery { x, y, u, v }, 1e-2) {
                Ok(m) => {
                    worst = worst.max(m.abs());
                    used += 1;
                }
                Err(Error::StencilOutsideDomain) | Err(Error::NotOnImage { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(worst)
    }

    fn write_artifacts(&mut self, report: &mut RunReport) -> Result<()> {
        let out = self
            .cfg
            .out_dir
            .as_ref()
            .expect("write_artifacts requires an output directory")
            .join(&self.cfg.scenario);
        std::fs::create_dir_all(&out)?;

        let report_path = out.join("report.json");
        let json = serde_json::to_string_pretty(&*report)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
        std::fs::write(&report_path, json)?;
        report.artifacts.push(report_path.display().to_string());
        if self.cfg.json_only {
            return Ok(());
        }

        let mut map = String::from("x1,x2,F,residual,flag\n");
        if let Some(field) = &self.field {
            for (p, e) in field.points.iter().zip(&field.evals) {
                map.push_str(&format!(
                    "{:.12e},{:.12e},{:.12e},{:.12e},{:?}\n",
                    p.x1, p.x2, e.y, e.residual, e.flag
                ));
            }
        }
        write_file(&out, "map.csv", &map, report)?;

        let mut density = String::from("z,h\n");
        if let Some(qs) = &self.quotient {
            for (&z, &h) in qs.z_grid().iter().zip(qs.density_table()) {
                density.push_str(&format!("{z:.12e},{h:.12e}\n"));
            }
        }
        write_file(&out, "density.csv", &density, report)?;

        let mut plan_csv = String::from("i,j,x1,x2,y,mass\n");
        if let Some((dp, plan)) = &self.oracle {
            for &(i, j, q) in &plan.entries {
                plan_csv.push_str(&format!(
                    "{i},{j},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                    dp.sources[i].x1, dp.sources[i].x2, dp.targets[j], q
                ));
            }
        }
        write_file(&out, "plan.csv", &plan_csv, report)?;

        let mut curves = String::from("y,level,polyline,vertex,x1,x2\n");
        let (a, b) = self.cost.y_range();
        for frac in [0.2, 0.4, 0.6, 0.8] {
            let y = a + (b - a) * frac;
            let Ok((level, curve)) = self.sp.split_level(y, self.cfg.curve_resolution.min(256))
            else {
                continue;
            };
            for (pi, poly) in curve.polylines.iter().enumerate() {
                for (vi, p) in poly.iter().enumerate() {
                    curves.push_str(&format!(
                        "{y:.12e},{level:.12e},{pi},{vi},{:.12e},{:.12e}\n",
                        p.x1, p.x2
                    ));
                }
            }
        }
        write_file(&out, "levelcurves.csv", &curves, report)?;

        // Refresh report.json with the final artifact list.
        let json = serde_json::to_string_pretty(&*report)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
        std::fs::write(&report_path, json)?;
        Ok(())
    }
}

fn field_spacing(field: &MapField) -> f64 {
    let mut best = f64::INFINITY;
    let p0 = field.points[0];
    for &p in &field.points[1..] {
        best = best.min(p0.dist(p));
    }
    best
}

fn write_file(dir: &std::path::Path, name: &str, content: &str, report: &mut RunReport) -> Result<()> {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)?;
    f.write_all(content.as_bytes())?;
    report.artifacts.push(path.display().to_string());
    Ok(())
}
