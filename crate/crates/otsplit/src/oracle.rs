//! Discrete Kantorovich oracle: a coarse atomization of the two marginals, an
//! exact transportation-simplex solver with dual certificates, and the checks
//! that compare the discrete plan against the continuous construction
//! (c-monotone support, barycentric map, potential indifference on level
//! curves).

use crate::cost::{CostModel, Point2};
use crate::geometry::LevelCurve;
use crate::measure::{SourceMeasure, TargetMeasure};
use crate::{Error, Result};

/// The finite transport problem: atoms of μ and ν with a dense cost matrix.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub sources: Vec<Point2>,
    pub source_mass: Vec<f64>,
    pub targets: Vec<f64>,
    pub target_mass: Vec<f64>,
    /// cost[i * targets.len() + j] = c(x_i, y_j).
    pub cost: Vec<f64>,
}

impl DiscreteProblem {
    /// Atomizes the marginals: source atoms at the cells of an `nx`×`nx`
    /// midpoint grid, target atoms at `ny` interval midpoints with masses
    /// `ν` of the subintervals. Zero atoms are dropped and both sides are
    /// rebalanced to total mass one.
    pub fn discretize(
        cost: &CostModel,
        mu_density: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        nu: &TargetMeasure,
        nx: usize,
        ny: usize,
    ) -> Result<DiscreteProblem> {
        let coarse = SourceMeasure::new(cost.domain().clone(), mu_density, nx)?;
        let mut sources = Vec::new();
        let mut source_mass = Vec::new();
        for c in coarse.cells() {
            sources.push(c.center);
            source_mass.push(c.mass);
        }
        let (a, b) = nu.interval();
        let dy = (b - a) / ny as f64;
        let mut targets = Vec::new();
        let mut target_mass = Vec::new();
        for j in 0..ny {
            let lo = a + j as f64 * dy;
            let hi = lo + dy;
            let w = nu.cdf(hi)? - nu.cdf(lo)?;
            if w > 0.0 {
                targets.push(lo + 0.5 * dy);
                target_mass.push(w);
            }
        }
        if targets.is_empty() {
            return Err(Error::InvalidArgument("target discretization is empty".into()));
        }
        let tw: f64 = target_mass.iter().sum();
        for w in &mut target_mass {
            *w /= tw;
        }
        let mut matrix = Vec::with_capacity(sources.len() * targets.len());
        for &x in &sources {
            for &y in &targets {
                matrix.push(cost.eval(x, y));
            }
        }
        Ok(DiscreteProblem { sources, source_mass, targets, target_mass, cost: matrix })
    }

    pub fn cost_at(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.targets.len() + j]
    }
}

/// A sparse optimal coupling with its dual certificate.
#[derive(Debug, Clone)]
pub struct Plan {
    /// Nonzero entries (i, j, mass). Basic entries may carry zero mass
    /// (degenerate bases); these are filtered out here.
    pub entries: Vec<(usize, usize, f64)>,
    pub objective: f64,
    /// Source potentials u_i (the c-concave side).
    pub u: Vec<f64>,
    /// Target potentials u^c_j, with the sign convention u_i + u^c_j ≤ c_ij.
    pub uc: Vec<f64>,
    /// Max over all (i, j) of u_i + u^c_j − c_ij (≤ 0 up to roundoff).
    pub dual_feasibility: f64,
    /// Max over support of |c_ij − u_i − u^c_j|.
    pub complementary_slackness: f64,
    pub pivots: usize,
}

/// Exact optimal coupling by the transportation simplex: north-west corner
/// start, tree-based dual updates, Dantzig entering rule with Bland's rule as
/// the anti-cycling fallback under an ε-perturbation of the supplies.
pub fn solve_kantorovich(dp: &DiscreteProblem) -> Result<Plan> {
    let m = dp.sources.len();
    let n = dp.targets.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("empty marginal".into()));
    }
    // ε-perturbation keeps the basis trees nondegenerate in practice; the
    // excess is absorbed by the last column.
    let perturb = 1e-12;
    let mut supply: Vec<f64> = dp.source_mass.iter().enumerate().map(|(i, &s)| s + i as f64 * perturb).collect();
    let mut demand: Vec<f64> = dp.target_mass.to_vec();
    let extra: f64 = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    demand[n - 1] += extra;

    // Basis as a spanning tree over m + n nodes (sources 0..m, targets m..m+n).
    // flow holds basic entries, possibly with zero mass.
    let mut flow: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    {
        let (mut i, mut j) = (0usize, 0usize);
        let (mut s, mut d) = (supply[0], demand[0]);
        loop {
            let q = s.min(d);
            flow.push((i, j, q));
            s -= q;
            d -= q;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if s <= d && i < m - 1 {
                i += 1;
                s = supply[i];
            } else if j < n - 1 {
                j += 1;
                d = demand[j];
            } else {
                i += 1;
                s = supply[i];
            }
        }
    }
    let _ = (&mut supply, &mut demand);

    let max_pivots = 1_000_000usize;
    let mut pivots = 0usize;
    let mut bland = false;
    let mut stall = 0usize;
    loop {
        // Duals from the basis tree: u_i + v_j = c_ij on basic cells, v
        // anchored at the first target reached from source 0.
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n]; // (other node, basic idx)
        for (k, &(i, j, _)) in flow.iter().enumerate() {
            adj[i].push((m + j, k));
            adj[m + j].push((i, k));
        }
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        let mut stack = vec![0usize];
        u[0] = 0.0;
        while let Some(node) = stack.pop() {
            for &(other, k) in &adj[node] {
                let (i, j, _) = flow[k];
                if other >= m {
                    if v[other - m].is_nan() {
                        v[other - m] = dp.cost_at(i, j) - u[i];
                        stack.push(other);
                    }
                } else if u[other].is_nan() {
                    u[other] = dp.cost_at(i, j) - v[j];
                    stack.push(other);
                }
            }
        }
        if u.iter().any(|x| x.is_nan()) || v.iter().any(|x| x.is_nan()) {
            return Err(Error::DegenerateStall);
        }

        // Entering variable: most negative reduced cost (Dantzig), or the
        // first negative one under Bland's rule.
        let mut enter: Option<(usize, usize, f64)> = None;
        'search: for i in 0..m {
            for j in 0..n {
                let rc = dp.cost_at(i, j) - u[i] - v[j];
                if rc < -1e-11 {
                    if bland {
                        enter = Some((i, j, rc));
                        break 'search;
                    }
                    match enter {
                        Some((_, _, best)) if rc >= best => {}
                        _ => enter = Some((i, j, rc)),
                    }
                }
            }
        }
        let Some((ei, ej, _)) = enter else { break };
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::DegenerateStall);
        }

        // Cycle: path from source ei to target ej in the basis tree, plus the
        // entering cell.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; m + n]; // (prev node, basic idx)
        let mut seen = vec![false; m + n];
        let mut queue = std::collections::VecDeque::from([ei]);
        seen[ei] = true;
        while let Some(node) = queue.pop_front() {
            if node == m + ej {
                break;
            }
            for &(other, k) in &adj[node] {
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some((node, k));
                    queue.push_back(other);
                }
            }
        }
        let mut path = Vec::new(); // basic indices from target ej back to source ei
        let mut node = m + ej;
        while let Some((prev, k)) = parent[node] {
            path.push(k);
            node = prev;
        }
        if node != ei {
            return Err(Error::DegenerateStall);
        }
        // Alternate signs along the cycle: entering cell is +, the first tree
        // edge out of target ej is −, and so on.
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (step, &k) in path.iter().enumerate() {
            if step % 2 == 0 {
                if flow[k].2 < theta {
                    theta = flow[k].2;
                    leave = k;
                }
            }
        }
        if leave == usize::MAX {
            return Err(Error::DegenerateStall);
        }
        if theta <= 1e-15 {
            stall += 1;
            if stall > 50 {
                bland = true;
            }
        } else {
            stall = 0;
        }
        for (step, &k) in path.iter().enumerate() {
            if step % 2 == 0 {
                flow[k].2 -= theta;
            } else {
                flow[k].2 += theta;
            }
        }
        flow[leave] = (ei, ej, theta);
    }

    // Recompute duals once more for the certificate.
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + n];
    for (k, &(i, j, _)) in flow.iter().enumerate() {
        adj[i].push((m + j, k));
        adj[m + j].push((i, k));
    }
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    let mut stack = vec![0usize];
    u[0] = 0.0;
    while let Some(node) = stack.pop() {
        for &(other, k) in &adj[node] {
            let (i, j, _) = flow[k];
            if other >= m {
                if v[other - m].is_nan() {
                    v[other - m] = dp.cost_at(i, j) - u[i];
                    stack.push(other);
                }
            } else if u[other].is_nan() {
                u[other] = dp.cost_at(i, j) - v[j];
                stack.push(other);
            }
        }
    }

    let mut dual_feasibility = f64::NEG_INFINITY;
    for i in 0..m {
        for j in 0..n {
            dual_feasibility = dual_feasibility.max(u[i] + v[j] - dp.cost_at(i, j));
        }
    }
    let mass_floor = 1e-10;
    let mut entries = Vec::new();
    let mut objective = 0.0;
    let mut cs = 0.0f64;
    for &(i, j, q) in &flow {
        if q > mass_floor {
            entries.push((i, j, q));
            objective += q * dp.cost_at(i, j);
            cs = cs.max((dp.cost_at(i, j) - u[i] - v[j]).abs());
        }
    }
    Ok(Plan {
        entries,
        objective,
        u,
        uc: v,
        dual_feasibility,
        complementary_slackness: cs,
        pivots,
    })
}

/// Worst c-monotonicity violation over sampled support pairs:
/// max over pairs of c(x,y) + c(x',y') − c(x,y') − c(x',y), clipped at zero.
/// Nonpositive for an optimal plan.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport {
    pub worst_violation: f64,
    pub pairs_checked: usize,
}

pub fn c_monotonicity_check(
    plan: &Plan,
    dp: &DiscreteProblem,
    sample_pairs: usize,
    seed: u64,
) -> MonotonicityReport {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let k = plan.entries.len();
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    if k < 2 {
        return MonotonicityReport { worst_violation: 0.0, pairs_checked: 0 };
    }
    while pairs < sample_pairs {
        let a = rng.gen_range(0..k);
        let b = rng.gen_range(0..k);
        if a == b {
            continue;
        }
        let (i1, j1, _) = plan.entries[a];
        let (i2, j2, _) = plan.entries[b];
        let gain =
            dp.cost_at(i1, j1) + dp.cost_at(i2, j2) - dp.cost_at(i1, j2) - dp.cost_at(i2, j1);
        worst = worst.max(gain);
        pairs += 1;
    }
    MonotonicityReport { worst_violation: worst, pairs_checked: pairs }
}

/// Barycentric projection of the plan: per source atom, the plan-weighted mean
/// target together with the plan-weighted spread around it.
#[derive(Debug, Clone)]
pub struct BarycentricMap {
    pub values: Vec<f64>,
    /// Plan-weighted standard deviation of the conditional target per atom;
    /// near zero exactly where the plan is a map.
    pub spread: Vec<f64>,
}

pub fn barycentric_map(plan: &Plan, dp: &DiscreteProblem) -> BarycentricMap {
    let m = dp.sources.len();
    let mut w = vec![0.0f64; m];
    let mut wy = vec![0.0f64; m];
    let mut wy2 = vec![0.0f64; m];
    for &(i, j, q) in &plan.entries {
        let y = dp.targets[j];
        w[i] += q;
        wy[i] += q * y;
        wy2[i] += q * y * y;
    }
    let mut values = vec![f64::NAN; m];
    let mut spread = vec![f64::NAN; m];
    for i in 0..m {
        if w[i] > 0.0 {
            let mean = wy[i] / w[i];
            values[i] = mean;
            spread[i] = (wy2[i] / w[i] - mean * mean).max(0.0).sqrt();
        }
    }
    BarycentricMap { values, spread }
}

/// Max pairwise deviation of `u_i − c(x_i, ȳ)` over source atoms nearest to a
/// level curve, where `ȳ` is the plan-weighted modal target of those atoms.
/// Small when the dual potential is c-affine along the curve, as the
/// indifference picture predicts for a c-linear cost.
#[derive(Debug, Clone, Copy)]
pub struct IndifferenceReport {
    pub deviation: f64,
    pub atoms: usize,
    pub y_bar: f64,
}

pub fn potential_indifference_check(
    plan: &Plan,
    dp: &DiscreteProblem,
    cost: &CostModel,
    curve: &LevelCurve,
    linearity_defect: f64,
    linearity_tolerance: f64,
) -> Result<IndifferenceReport> {
    if linearity_defect > linearity_tolerance {
        return Err(Error::NotCLinear {
            defect: linearity_defect,
            tolerance: linearity_tolerance,
        });
    }
    // Source atoms nearest to the curve: within one atom spacing.
    let spacing = {
        let mut best = f64::INFINITY;
        for i in 1..dp.sources.len() {
            best = best.min(dp.sources[i].dist(dp.sources[i - 1]));
        }
        best.max(1e-6)
    };
    let verts: Vec<Point2> = curve.vertices().collect();
    let mut atoms = Vec::new();
    for (i, &x) in dp.sources.iter().enumerate() {
        let d = verts.iter().map(|&v| x.dist(v)).fold(f64::INFINITY, f64::min);
        if d <= spacing {
            atoms.push(i);
        }
    }
    if atoms.is_empty() {
        return Err(Error::EmptyCurve(curve.level));
    }
    // Plan-weighted modal target over the selected atoms.
    let mut weight = vec![0.0f64; dp.targets.len()];
    for &(i, j, q) in &plan.entries {
        if atoms.binary_search(&i).is_ok() {
            weight[j] += q;
        }
    }
    let jbar = weight
        .iter()
        .enumerate()
        .max_by(|p, q| p.1.total_cmp(q.1))
        .map(|(j, _)| j)
        .unwrap();
    let y_bar = dp.targets[jbar];
    let vals: Vec<f64> = atoms.iter().map(|&i| plan.u[i] - cost.eval(dp.sources[i], y_bar)).collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(IndifferenceReport { deviation: hi - lo, atoms: atoms.len(), y_bar })
}

/// L¹ distance between the barycentric map and a reference map sampled at the
/// source atoms, weighted by the source masses.
pub fn l1_map_distance(
    bary: &BarycentricMap,
    dp: &DiscreteProblem,
    reference: impl Fn(Point2) -> f64,
) -> f64 {
    let mut acc = 0.0;
    for (i, &x) in dp.sources.iter().enumerate() {
        if bary.values[i].is_finite() {
            acc += dp.source_mass[i] * (bary.values[i] - reference(x)).abs();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Domain;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn tiny(costs: &[f64], sm: &[f64], tm: &[f64]) -> DiscreteProblem {
        let m = sm.len();
        let n = tm.len();
        assert_eq!(costs.len(), m * n);
        DiscreteProblem {
            sources: (0..m).map(|i| Point2::new(i as f64, 0.0)).collect(),
            source_mass: sm.to_vec(),
            targets: (0..n).map(|j| j as f64).collect(),
            target_mass: tm.to_vec(),
            cost: costs.to_vec(),
        }
    }

    #[test]
    fn one_by_one() {
        let dp = tiny(&[3.0], &[1.0], &[1.0]);
        let plan = solve_kantorovich(&dp).unwrap();
        assert_eq!(plan.entries.len(), 1);
        assert_abs_diff_eq!(plan.objective, 3.0, epsilon = 1e-12);
        assert!(plan.dual_feasibility <= 1e-9);
    }

    #[test]
    fn two_atom_identity_is_optimal() {
        // Diagonal cheap, off-diagonal expensive: the identity pairing wins.
        let dp = tiny(&[0.0, 1.0, 1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5]);
        let plan = solve_kantorovich(&dp).unwrap();
        assert_abs_diff_eq!(plan.objective, 0.0, epsilon = 1e-9);
        for &(i, j, q) in &plan.entries {
            if q > 1e-9 {
                assert_eq!(i, j);
            }
        }
        assert!(plan.dual_feasibility <= 1e-9);
        assert!(plan.complementary_slackness <= 1e-9);
    }

    #[test]
    fn square_cost_matches_monotone_rearrangement() {
        // 1D quadratic cost: optimal coupling is the monotone one; the
        // objective is computable by hand for two atoms each side.
        let dp = tiny(
            &[(0.0f64 - 0.0).powi(2), (0.0f64 - 1.0).powi(2), (1.0f64 - 0.0).powi(2), (1.0f64 - 1.0).powi(2)],
            &[0.3, 0.7],
            &[0.6, 0.4],
        );
        let plan = solve_kantorovich(&dp).unwrap();
        // Monotone: (0→0, 0.3), (1→0, 0.3), (1→1, 0.4); cost = 0.3.
        assert_abs_diff_eq!(plan.objective, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn monotonicity_detects_a_crossed_plan() {
        let dp = tiny(&[0.0, 1.0, 1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5]);
        let crossed = Plan {
            entries: vec![(0, 1, 0.5), (1, 0, 0.5)],
            objective: 1.0,
            u: vec![0.0; 2],
            uc: vec![0.0; 2],
            dual_feasibility: 0.0,
            complementary_slackness: 0.0,
            pivots: 0,
        };
        let rep = c_monotonicity_check(&crossed, &dp, 1000, 7);
        assert_abs_diff_eq!(rep.worst_violation, 2.0, epsilon = 1e-12);

        let plan = solve_kantorovich(&dp).unwrap();
        let rep = c_monotonicity_check(&plan, &dp, 1000, 7);
        assert!(rep.worst_violation <= 1e-9);
    }

    #[test]
    fn quarter_disk_oracle_recovers_polar_angle() {
        let cost = CostModel::quarter_disk();
        let nu = TargetMeasure::uniform((0.0, FRAC_PI_2), 1024).unwrap();
        let dp = DiscreteProblem::discretize(&cost, |_| 1.0, &nu, 12, 24).unwrap();
        let plan = solve_kantorovich(&dp).unwrap();
        assert!(plan.dual_feasibility <= 1e-9, "dual feas {}", plan.dual_feasibility);
        assert!(plan.complementary_slackness <= 1e-7);
        let bary = barycentric_map(&plan, &dp);
        let l1 = l1_map_distance(&bary, &dp, |p| p.x2.atan2(p.x1));
        assert!(l1 <= 0.08, "l1 = {l1}");
        let rep = c_monotonicity_check(&plan, &dp, 10_000, 42);
        assert!(rep.worst_violation <= 1e-9, "violation {}", rep.worst_violation);
    }

    #[test]
    fn bilinear_oracle_certificates() {
        let cost = CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0)).unwrap();
        let nu = TargetMeasure::uniform((0.0, 1.0), 512).unwrap();
        let dp = DiscreteProblem::discretize(&cost, |_| 1.0, &nu, 10, 20).unwrap();
        let plan = solve_kantorovich(&dp).unwrap();
        assert!(plan.dual_feasibility <= 1e-9);
        assert!(plan.complementary_slackness <= 1e-7);
        // Optimal map is F(x) = 1 - x2 (c = x2·y pays to send large x2 to small y).
        let bary = barycentric_map(&plan, &dp);
        let l1 = l1_map_distance(&bary, &dp, |p| 1.0 - p.x2);
        assert!(l1 <= 0.06, "l1 = {l1}");
    }

    #[test]
    fn barycentric_spread_vanishes_for_a_map() {
        let dp = tiny(&[0.0, 1.0, 1.0, 0.0], &[0.5, 0.5], &[0.5, 0.5]);
        let plan = solve_kantorovich(&dp).unwrap();
        let bary = barycentric_map(&plan, &dp);
        for s in &bary.spread {
            assert_abs_diff_eq!(*s, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn indifference_on_bilinear_level_line() {
        let cost = CostModel::builtin("bilinear", Domain::unit_square(), (0.0, 1.0)).unwrap();
        let nu = TargetMeasure::uniform((0.0, 1.0), 512).unwrap();
        let dp = DiscreteProblem::discretize(&cost, |_| 1.0, &nu, 16, 24).unwrap();
        let plan = solve_kantorovich(&dp).unwrap();
        let curve = crate::geometry::trace_level_curve(
            &cost,
            Point2::new(0.5, 0.5),
            0.5,
            128,
        )
        .unwrap();
        let rep =
            potential_indifference_check(&plan, &dp, &cost, &curve, 0.0, 1e-3).unwrap();
        assert!(rep.atoms >= 8);
        // Selected atoms sit up to half a cell off the line, so the deviation
        // is grid-limited rather than zero.
        assert!(rep.deviation <= 1e-2, "deviation {}", rep.deviation);

        let err = potential_indifference_check(&plan, &dp, &cost, &curve, 0.1, 1e-3);
        assert!(matches!(err, Err(Error::NotCLinear { .. })));
    }
}
