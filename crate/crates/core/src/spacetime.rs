//! Space-time reformulation of the optimality system in the state alone:
//!
//! -y_tt + nu^2 y_xxxx + y/alpha = g in (0,1) x (0,T), y(0) = y0,
//! y_t - nu y_xx = f_T at t = T, y = 0 and nu y_xx + b = 0 on the boundary,
//!
//! discretized with P1 elements in time and cubic Hermite elements in space,
//! plus the temporal residual estimator and the adaptive time-grid loop.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{invalid, Error, Result};
use crate::fem1d::{assemble_hermite, interpolate_hermite, HermiteOps, Jet, Trajectory};
use crate::grid::{bisect_marked, uniform_time_grid, SpatialGrid, TimeGrid};
use crate::linalg::BlockTridiag;

/// Data of the reformulated problem.
pub trait SpaceTimeData {
    /// Right-hand side g(x,t).
    fn source(&self, x: f64, t: f64) -> Jet;
    /// Terminal load f_T(x), entering as the integral of f_T v(T).
    fn terminal(&self, x: f64) -> Jet;
    /// Initial state y0(x).
    fn initial(&self, x: f64) -> Jet;
    /// Boundary data b(t) at x = 0 and x = 1 in the natural condition nu y_xx + b = 0.
    fn boundary(&self, t: f64) -> [f64; 2];
}

const GAUSS3_S: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

#[derive(Debug, Clone)]
struct QuadPoint {
    /// local coordinate in [0,1]
    s: f64,
    weight: f64,
    source: DVector<f64>,
    boundary: [f64; 2],
}

/// Assembled space-time system.
#[derive(Debug, Clone)]
pub struct SpaceTimeSystem {
    pub ops: HermiteOps,
    pub grid: TimeGrid,
    pub alpha: f64,
    pub nu: f64,
    /// Block matrix over all time levels 0..=n, before eliminating level 0.
    pub matrix: BlockTridiag,
    /// Load per time level 0..=n.
    pub load: Vec<DVector<f64>>,
    /// Hermite interpolant of the initial state.
    pub y0: DVector<f64>,
    quad: Vec<[QuadPoint; 3]>,
}

pub fn assemble(
    spatial: &SpatialGrid,
    tg: &TimeGrid,
    alpha: f64,
    nu: f64,
    data: &impl SpaceTimeData,
) -> Result<SpaceTimeSystem> {
    if !(alpha > 0.0) {
        return invalid(format!("alpha must be positive, got {alpha}"));
    }
    if !(nu > 0.0) {
        return invalid(format!("nu must be positive, got {nu}"));
    }
    let ops = assemble_hermite(spatial);
    let m = ops.dim();
    let n = tg.n_intervals();
    let c = &ops.mass / alpha + &ops.bending * (nu * nu);
    let mut diag = vec![DMatrix::zeros(m, m); n + 1];
    let mut lower = Vec::with_capacity(n);
    let mut load = vec![DVector::zeros(m); n + 1];
    let mut quad = Vec::with_capacity(n);
    for j in 1..=n {
        let dt = tg.dt(j);
        let d = &ops.mass / dt + &c * (dt / 3.0);
        diag[j - 1] += &d;
        diag[j] += &d;
        lower.push(&ops.mass * (-1.0 / dt) + &c * (dt / 6.0));
        let t0 = tg.points()[j - 1];
        let pts: [QuadPoint; 3] = std::array::from_fn(|q| {
            let s = GAUSS3_S[q];
            let t = t0 + s * dt;
            QuadPoint {
                s,
                weight: GAUSS3_W[q] * dt,
                source: interpolate_hermite(spatial, |x| data.source(x, t)),
                boundary: data.boundary(t),
            }
        });
        for p in &pts {
            let ms = &ops.mass * &p.source;
            load[j - 1] += &ms * (p.weight * (1.0 - p.s));
            load[j] += &ms * (p.weight * p.s);
        }
        quad.push(pts);
    }
    diag[n] += &ops.stiffness * nu;
    load[n] += &ops.mass * interpolate_hermite(spatial, |x| data.terminal(x));
    let y0 = interpolate_hermite(spatial, |x| data.initial(x));
    Ok(SpaceTimeSystem {
        ops,
        grid: tg.clone(),
        alpha,
        nu,
        matrix: BlockTridiag { diag, lower },
        load,
        y0,
        quad,
    })
}

/// Solve with y(t_0) = y0 eliminated.
pub fn solve(sys: &SpaceTimeSystem) -> Result<Trajectory> {
    let inner = BlockTridiag {
        diag: sys.matrix.diag[1..].to_vec(),
        lower: sys.matrix.lower[1..].to_vec(),
    };
    let mut rhs: Vec<DVector<f64>> = sys.load[1..].to_vec();
    rhs[0] -= &sys.matrix.lower[0] * &sys.y0;
    let x = inner.factor()?.solve(&rhs);
    let mut values = Vec::with_capacity(x.len() + 1);
    values.push(sys.y0.clone());
    values.extend(x);
    Trajectory::new(sys.grid.clone(), values)
}

/// Relative residual of the equations at levels 1..=n.
pub fn relative_residual(sys: &SpaceTimeSystem, y: &Trajectory) -> f64 {
    let r = sys.matrix.mul(&y.values);
    let num: f64 = r[1..].iter().zip(&sys.load[1..]).map(|(a, b)| (a - b).norm_squared()).sum();
    let den: f64 = sys.load[1..].iter().map(|b| b.norm_squared()).sum::<f64>().max(f64::MIN_POSITIVE);
    (num / den).sqrt()
}

/// Per-interval estimator contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub t_left: Vec<f64>,
    pub t_right: Vec<f64>,
    pub interior: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl EstimatorReport {
    /// eta_j^2 per interval.
    pub fn indicators(&self) -> Vec<f64> {
        self.interior.iter().zip(&self.boundary).map(|(a, b)| a + b).collect()
    }

    pub fn total(&self) -> f64 {
        self.indicators().iter().sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t_left,t_right,interior,boundary,eta2")?;
        for j in 0..self.interior.len() {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e}",
                self.t_left[j],
                self.t_right[j],
                self.interior[j],
                self.boundary[j],
                self.interior[j] + self.boundary[j]
            )?;
        }
        Ok(())
    }
}

/// Temporal residual estimator, 3-point Gauss in time on each interval.
pub fn estimate(sys: &SpaceTimeSystem, y: &Trajectory) -> Result<EstimatorReport> {
    if y.grid != sys.grid || y.dim() != sys.ops.dim() {
        return invalid("trajectory does not belong to this space-time system");
    }
    let mass_chol: Cholesky<f64, Dyn> =
        Cholesky::new(sys.ops.mass.clone()).ok_or(Error::NotPositiveDefinite("Hermite mass"))?;
    let bend = &sys.ops.bending * (sys.nu * sys.nu);
    let n = sys.grid.n_intervals();
    let mut rep = EstimatorReport {
        t_left: sys.grid.points()[..n].to_vec(),
        t_right: sys.grid.points()[1..].to_vec(),
        interior: vec![0.0; n],
        boundary: vec![0.0; n],
    };
    for j in 1..=n {
        let dt = sys.grid.dt(j);
        for p in &sys.quad[j - 1] {
            let yq = &y.values[j - 1] * (1.0 - p.s) + &y.values[j] * p.s;
            let z = mass_chol.solve(&(&bend * &yq));
            let r = &p.source - &yq / sys.alpha - z;
            rep.interior[j - 1] += dt * dt * p.weight * r.dot(&(&sys.ops.mass * &r));
            let b0 = sys.nu * sys.ops.d2_left.dot(&yq) + p.boundary[0];
            let b1 = sys.nu * sys.ops.d2_right.dot(&yq) + p.boundary[1];
            rep.boundary[j - 1] += p.weight * (b0 * b0 + b1 * b1);
        }
    }
    Ok(rep)
}

/// Settings of the adaptive loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptOptions {
    /// Dorfler marking fraction in (0,1].
    pub theta: f64,
    /// Intervals of the initial uniform grid; `None` selects [`default_initial_intervals`].
    pub initial_intervals: Option<usize>,
    pub t_final: f64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self { theta: 0.5, initial_intervals: None, t_final: 1.0 }
    }
}

/// Initial uniform grid size for a dof budget: about half of the budget,
/// rounded down to a multiple of ten intervals.
pub fn default_initial_intervals(budget: usize) -> usize {
    let n = 10 * ((budget.saturating_sub(1)) / 20);
    if n == 0 {
        budget.saturating_sub(1).clamp(1, 10)
    } else {
        n
    }
}

/// Outcome of the adaptive loop.
#[derive(Debug, Clone)]
pub struct Adapted {
    pub grid: TimeGrid,
    /// Space-time solution on the final grid.
    pub state: Trajectory,
    /// Estimator on the final grid.
    pub report: EstimatorReport,
    /// Number of refinement sweeps.
    pub sweeps: usize,
}

/// Smallest set of intervals (0-based) carrying at least `theta` of the total,
/// largest first, ties toward earlier intervals.
pub fn dorfler_mark(eta: &[f64], theta: f64) -> Vec<usize> {
    let order = descending_order(eta);
    let total: f64 = eta.iter().sum();
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for j in order {
        marked.push(j);
        acc += eta[j];
        if acc >= theta * total {
            break;
        }
    }
    marked
}

fn descending_order(eta: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));
    order
}

/// Adaptive time-grid construction landing exactly on `dof_budget` points.
pub fn adapt(
    spatial: &SpatialGrid,
    alpha: f64,
    nu: f64,
    data: &impl SpaceTimeData,
    dof_budget: usize,
    opts: AdaptOptions,
) -> Result<Adapted> {
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return invalid(format!("marking fraction {} outside (0,1]", opts.theta));
    }
    let n0 = opts.initial_intervals.unwrap_or_else(|| default_initial_intervals(dof_budget));
    if n0 == 0 || dof_budget < n0 + 1 {
        return invalid(format!("dof budget {dof_budget} below initial grid size {}", n0 + 1));
    }
    let mut grid = uniform_time_grid(opts.t_final, n0)?;
    let mut sweeps = 0;
    loop {
        let sys = assemble(spatial, &grid, alpha, nu, data)?;
        let state = solve(&sys)?;
        let report = estimate(&sys, &state)?;
        if grid.dof() == dof_budget {
            return Ok(Adapted { grid, state, report, sweeps });
        }
        let eta = report.indicators();
        let mut marked = dorfler_mark(&eta, opts.theta);
        let room = dof_budget - grid.dof();
        if marked.len() > room {
            marked = descending_order(&eta)[..room].to_vec();
        }
        let one_based: Vec<usize> = marked.iter().map(|j| j + 1).collect();
        grid = bisect_marked(&grid, &one_based)?;
        sweeps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::manufactured;

    struct Zero;
    impl SpaceTimeData for Zero {
        fn source(&self, _: f64, _: f64) -> Jet {
            Jet::default()
        }
        fn terminal(&self, _: f64) -> Jet {
            Jet::default()
        }
        fn initial(&self, _: f64) -> Jet {
            Jet::default()
        }
        fn boundary(&self, _: f64) -> [f64; 2] {
            [0.0; 2]
        }
    }

    fn layer_data() -> crate::problem::ManufacturedSpaceTime {
        manufactured(1e-3, 1.0, 1.0).unwrap().spacetime_data(true, 1.0)
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = SpatialGrid::new(5).unwrap();
        let tg = uniform_time_grid(1.0, 6).unwrap();
        let sys = assemble(&g, &tg, 1.0, 1.0, &Zero).unwrap();
        assert!(sys.load.iter().all(|l| l.norm() == 0.0));
        let y = solve(&sys).unwrap();
        assert!(y.values.iter().all(|v| v.norm() == 0.0));
        let rep = estimate(&sys, &y).unwrap();
        assert_eq!(rep.total(), 0.0);
    }

    #[test]
    fn system_shape_and_symmetry() {
        let g = SpatialGrid::new(5).unwrap();
        let tg = TimeGrid::from_points(vec![0.0, 0.3, 0.5, 0.55, 1.0]).unwrap();
        let sys = assemble(&g, &tg, 1.0, 1.0, &layer_data()).unwrap();
        assert_eq!(sys.matrix.n_blocks() * sys.ops.dim(), 5 * 10);
        assert!(sys.matrix.max_asymmetry() <= 1e-12 * sys.matrix.max_abs());
        assert!(assemble(&g, &tg, 0.0, 1.0, &layer_data()).is_err());
    }

    #[test]
    fn solution_satisfies_system() {
        let g = SpatialGrid::new(5).unwrap();
        let tg = uniform_time_grid(1.0, 12).unwrap();
        let sys = assemble(&g, &tg, 1.0, 1.0, &layer_data()).unwrap();
        let y = solve(&sys).unwrap();
        assert!(relative_residual(&sys, &y) <= 1e-10);
    }

    #[test]
    fn layer_crosses_zero_at_half() {
        let g = SpatialGrid::new(4).unwrap();
        let tg = uniform_time_grid(1.0, 10).unwrap();
        let sys = assemble(&g, &tg, 1.0, 1.0, &layer_data()).unwrap();
        let y = solve(&sys).unwrap();
        let mid = |k: usize| sys.ops.nodal_values(&y.values[k])[2];
        assert!(mid(4) < 0.0 && mid(6) > 0.0);
    }

    #[test]
    fn largest_indicator_contains_half() {
        let g = SpatialGrid::new(5).unwrap();
        let tg = uniform_time_grid(1.0, 5).unwrap();
        let sys = assemble(&g, &tg, 1.0, 1.0, &layer_data()).unwrap();
        let rep = estimate(&sys, &solve(&sys).unwrap()).unwrap();
        let eta = rep.indicators();
        let j = descending_order(&eta)[0];
        assert!(rep.t_left[j] <= 0.5 && 0.5 <= rep.t_right[j]);
        assert!((rep.total() - eta.iter().sum::<f64>()).abs() == 0.0);
        assert!(eta.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn estimator_shrinks_under_uniform_refinement() {
        let g = SpatialGrid::new(5).unwrap();
        // below dt ~ 1/200 the layer is not sampled and totals still grow
        let totals: Vec<f64> = [200, 400, 800]
            .iter()
            .map(|&n| {
                let sys = assemble(&g, &uniform_time_grid(1.0, n).unwrap(), 1.0, 1.0, &layer_data()).unwrap();
                estimate(&sys, &solve(&sys).unwrap()).unwrap().total()
            })
            .collect();
        assert!(totals[1] <= totals[0] && totals[2] <= totals[1], "{totals:?}");
    }

    #[test]
    fn estimator_is_quadratic_in_data() {
        struct Scaled(crate::problem::ManufacturedSpaceTime, f64);
        impl SpaceTimeData for Scaled {
            fn source(&self, x: f64, t: f64) -> Jet {
                let j = self.0.source(x, t);
                Jet::new(j.value * self.1, j.slope * self.1)
            }
            fn terminal(&self, x: f64) -> Jet {
                let j = self.0.terminal(x);
                Jet::new(j.value * self.1, j.slope * self.1)
            }
            fn initial(&self, x: f64) -> Jet {
                let j = self.0.initial(x);
                Jet::new(j.value * self.1, j.slope * self.1)
            }
            fn boundary(&self, t: f64) -> [f64; 2] {
                self.0.boundary(t).map(|b| b * self.1)
            }
        }
        let g = SpatialGrid::new(5).unwrap();
        let tg = uniform_time_grid(1.0, 8).unwrap();
        let eta = |c: f64| {
            let sys = assemble(&g, &tg, 1.0, 1.0, &Scaled(layer_data(), c)).unwrap();
            estimate(&sys, &solve(&sys).unwrap()).unwrap().indicators()
        };
        let (a, b) = (eta(1.0), eta(-2.5));
        for (x, y) in a.iter().zip(&b) {
            assert!((y - 6.25 * x).abs() <= 1e-10 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn dorfler_smallest_set_with_ties() {
        assert_eq!(dorfler_mark(&[1.0, 3.0, 3.0, 1.0], 0.5), vec![1, 2]);
        assert_eq!(dorfler_mark(&[1.0, 3.0, 3.0, 1.0], 0.3), vec![1]);
        assert_eq!(dorfler_mark(&[2.0, 2.0], 0.5), vec![0]);
        assert_eq!(dorfler_mark(&[1.0, 1.0, 1.0], 1.0), vec![0, 1, 2]);
    }

    #[test]
    fn default_initial_grid_rule() {
        assert_eq!(default_initial_intervals(21), 10);
        assert_eq!(default_initial_intervals(47), 20);
        assert_eq!(default_initial_intervals(83), 40);
        assert_eq!(default_initial_intervals(109), 50);
        assert_eq!(default_initial_intervals(8), 7);
        assert_eq!(default_initial_intervals(2), 1);
    }

    #[test]
    fn adapt_hits_budget_and_keeps_points() {
        let g = SpatialGrid::new(5).unwrap();
        let opts = AdaptOptions { initial_intervals: Some(5), ..AdaptOptions::default() };
        let out = adapt(&g, 1.0, 1.0, &layer_data(), 21, opts).unwrap();
        assert_eq!(out.grid.dof(), 21);
        for k in 0..=5 {
            let t = k as f64 / 5.0;
            assert!(out.grid.points().contains(&t));
        }
        assert!(adapt(&g, 1.0, 1.0, &layer_data(), 4, opts).is_err());
        let bad = AdaptOptions { theta: 0.0, ..opts };
        assert!(adapt(&g, 1.0, 1.0, &layer_data(), 21, bad).is_err());
    }

    #[test]
    fn smooth_problem_gives_quasi_uniform_grid() {
        let g = SpatialGrid::new(5).unwrap();
        let data = manufactured(1.0, 1.0, 1.0).unwrap().spacetime_data(true, 1.0);
        let out = adapt(&g, 1.0, 1.0, &data, 21, AdaptOptions::default()).unwrap();
        let dt = out.grid.increments();
        let (lo, hi) = dt.iter().fold((f64::MAX, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
        assert!(hi / lo <= 4.0 * (1.0 + 1e-12), "ratio {}", hi / lo);
    }
}
