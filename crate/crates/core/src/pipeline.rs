//! Experiment orchestration: adaptive grid, snapshots, POD, reduced control,
//! error metrics against the manufactured solution, and CSV output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result, StageExt};
use crate::fem1d::{assemble_p1, interpolate_p1, prolongate, spacetime_l2_norm, MassStiffness, Trajectory};
use crate::grid::{trapezoidal_weights, uniform_time_grid, SpatialGrid, TimeGrid};
use crate::optctrl::{solve_reduced_ocp, Ocp};
use crate::parabolic::{solve_adjoint, solve_heat};
use crate::pod::{compute_pod, PodBasis};
use crate::problem::{manufactured, Manufactured};
use crate::spacetime::{self, AdaptOptions, EstimatorReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    Adaptive,
    Equidistant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotSource {
    /// Snapshots of the state for u = 0.
    Uncontrolled,
    /// Snapshots for the control recovered from the coarse space-time state.
    CoarseOptimal,
}

/// One experiment. Parsed from a flat `key = value` file; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Coarse cell width for the space-time stage.
    pub dx: f64,
    /// Fine cell width for snapshots and the control problem.
    pub h: f64,
    pub grid_mode: GridMode,
    /// Number of time points of the adaptive grid.
    pub dof: usize,
    /// Number of intervals of the equidistant grid.
    pub n: usize,
    pub snapshots: SnapshotSource,
    /// POD rank.
    pub rank: usize,
    pub alpha: f64,
    pub nu: f64,
    pub t_final: f64,
    pub eps: f64,
    /// Gradient-norm tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Dorfler marking fraction.
    pub theta: f64,
    /// Intervals of the initial adaptive grid; derived from `dof` when absent.
    pub initial_intervals: Option<usize>,
    /// Keep the state forcing in the space-time stage.
    pub include_f_in_spacetime: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dx: 0.2,
            h: 0.01,
            grid_mode: GridMode::Adaptive,
            dof: 21,
            n: 20,
            snapshots: SnapshotSource::Uncontrolled,
            rank: 1,
            alpha: 1.0,
            nu: 1.0,
            t_final: 1.0,
            eps: 1e-3,
            tol: 1e-6,
            max_iter: 100,
            theta: 0.5,
            initial_intervals: None,
            include_f_in_spacetime: true,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let (coarse, fine) = self.grids()?;
        if fine.n_cells() % coarse.n_cells() != 0 {
            return Err(Error::Config(format!("h = {} is not nested in dx = {}", self.h, self.dx)));
        }
        if self.rank == 0 {
            return Err(Error::Config("rank must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.nu > 0.0 && self.t_final > 0.0 && self.eps > 0.0 && self.tol > 0.0) {
            return Err(Error::Config("alpha, nu, t_final, eps and tol must be positive".into()));
        }
        if self.snapshots == SnapshotSource::CoarseOptimal && coarse.n_cells() < 2 {
            return Err(Error::Config("coarse-optimal snapshots need dx <= 1/2".into()));
        }
        Ok(())
    }

    fn grids(&self) -> Result<(SpatialGrid, SpatialGrid)> {
        let coarse = SpatialGrid::with_width(self.dx).map_err(|e| Error::Config(e.to_string()))?;
        let fine = SpatialGrid::with_width(self.h).map_err(|e| Error::Config(e.to_string()))?;
        if fine.n_cells() < 2 {
            return Err(Error::Config("h must leave an interior node".into()));
        }
        Ok((coarse, fine))
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn adapt_options(&self) -> AdaptOptions {
        AdaptOptions { theta: self.theta, initial_intervals: self.initial_intervals, t_final: self.t_final }
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub grid: TimeGrid,
    pub estimator: Option<EstimatorReport>,
    pub basis: PodBasis,
    pub eps_y: f64,
    pub eps_u: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub reduced_cost: f64,
    pub adapt_sweeps: usize,
    /// Space-time and parabolic solves on the spatial grids.
    pub pde_solves: usize,
    /// Forward and backward sweeps of the reduced model.
    pub ode_solves: usize,
    /// Wall-clock seconds per stage.
    pub timings: Vec<(&'static str, f64)>,
    pub fine: SpatialGrid,
    pub state_pod: Trajectory,
    pub state_exact: Trajectory,
    pub history: Vec<(f64, f64)>,
}

/// Exact solution interpolated on the fine grid at the trajectory's time points.
pub fn exact_trajectories(exact: &Manufactured, fine: &SpatialGrid, grid: &TimeGrid) -> (Trajectory, Trajectory) {
    let y = Trajectory::from_fn(grid, |t| interpolate_p1(fine, |x| exact.y_exact(x, t)));
    let u = Trajectory::from_fn(grid, |t| interpolate_p1(fine, |x| exact.u_exact(x, t)));
    (y, u)
}

/// Space-time L2 errors of state and control against the manufactured solution.
pub fn error_metrics(
    y: &Trajectory,
    u: &Trajectory,
    exact: &Manufactured,
    fine: &SpatialGrid,
    mass: &nalgebra::DMatrix<f64>,
) -> Result<(f64, f64)> {
    let (ye, ue) = exact_trajectories(exact, fine, &y.grid);
    Ok((spacetime_l2_norm(&ye.sub(y)?, mass)?, spacetime_l2_norm(&ue.sub(u)?, mass)?))
}

fn sample(grid: &TimeGrid, fine: &SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Trajectory {
    Trajectory::from_fn(grid, |t| interpolate_p1(fine, |x| f(x, t)))
}

/// Run the full method for one configuration.
pub fn run_algorithm1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (coarse, fine) = cfg.grids()?;
    let problem = manufactured(cfg.eps, cfg.alpha, cfg.nu)?;
    let data = problem.spacetime_data(cfg.include_f_in_spacetime, cfg.t_final);
    let mut timings = Vec::new();
    let mut pde_solves = 0;

    // step 1: time grid from the space-time problem on the coarse grid
    let clock = Instant::now();
    let (grid, st_state, estimator, adapt_sweeps) = match cfg.grid_mode {
        GridMode::Adaptive => {
            let out = spacetime::adapt(&coarse, cfg.alpha, cfg.nu, &data, cfg.dof, cfg.adapt_options())
                .stage("adaptive time grid")?;
            pde_solves += out.sweeps + 1;
            (out.grid, Some(out.state), Some(out.report), out.sweeps)
        }
        GridMode::Equidistant => {
            let grid = uniform_time_grid(cfg.t_final, cfg.n).stage("equidistant time grid")?;
            let state = if cfg.snapshots == SnapshotSource::CoarseOptimal {
                let sys = spacetime::assemble(&coarse, &grid, cfg.alpha, cfg.nu, &data).stage("space-time solve")?;
                pde_solves += 1;
                Some(spacetime::solve(&sys).stage("space-time solve")?)
            } else {
                None
            };
            (grid, state, None, 0)
        }
    };
    timings.push(("time_grid", clock.elapsed().as_secs_f64()));

    // steps 2-3: control for the snapshots, then snapshots on the fine grid
    let clock = Instant::now();
    let fine_ops = assemble_p1(&fine).stage("fine operators")?;
    let n_fine = fine_ops.dim();
    let control = match (cfg.snapshots, st_state) {
        (SnapshotSource::CoarseOptimal, Some(st)) => {
            let coarse_ops = assemble_p1(&coarse).stage("coarse adjoint")?;
            let herm = crate::fem1d::assemble_hermite(&coarse);
            let y_coarse = st.map(|c| {
                let v = herm.nodal_values(c);
                nalgebra::DVector::from_column_slice(&v[1..v.len() - 1])
            });
            let yd_coarse = sample(&grid, &coarse, |x, t| problem.y_d(x, t));
            let p = solve_adjoint(&coarse_ops, &grid, cfg.nu, &y_coarse, &yd_coarse).stage("coarse adjoint")?;
            pde_solves += 1;
            let u = p.scale(-1.0 / cfg.alpha);
            let values = u
                .values
                .iter()
                .map(|v| prolongate(v, &coarse, &fine))
                .collect::<Result<Vec<_>>>()
                .stage("prolongation")?;
            Trajectory::new(grid.clone(), values)?
        }
        _ => Trajectory::zeros(&grid, n_fine),
    };
    let f = sample(&grid, &fine, |x, t| problem.f(x, t));
    let y_d = sample(&grid, &fine, |x, t| problem.y_d(x, t));
    let y0 = interpolate_p1(&fine, |x| problem.y0(x));
    let snapshots = solve_heat(&fine_ops, &grid, cfg.nu, &f, &control, &y0).stage("snapshots")?;
    pde_solves += 1;
    timings.push(("snapshots", clock.elapsed().as_secs_f64()));

    // step 4: POD basis
    let clock = Instant::now();
    let beta = trapezoidal_weights(&grid);
    let basis = compute_pod(&snapshots, &beta, &fine_ops.mass, cfg.rank).stage("POD basis")?;
    timings.push(("pod", clock.elapsed().as_secs_f64()));

    // step 5: reduced optimal control
    let clock = Instant::now();
    let mass = fine_ops.mass.clone();
    let prob = Ocp::new(fine_ops, grid.clone(), cfg.nu, cfg.alpha, y0, f, y_d).stage("reduced control")?;
    let red = solve_reduced_ocp(&prob, &basis, cfg.tol, cfg.max_iter).stage("reduced control")?;
    timings.push(("reduced_ocp", clock.elapsed().as_secs_f64()));

    let (eps_y, eps_u) = error_metrics(&red.y, &red.u, &problem, &fine, &mass)?;
    let (state_exact, _) = exact_trajectories(&problem, &fine, &grid);
    let history = red
        .reduced
        .objective_history
        .iter()
        .copied()
        .zip(red.reduced.gradient_history.iter().copied())
        .collect();
    Ok(ExperimentReport {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        grid,
        estimator,
        basis,
        eps_y,
        eps_u,
        iterations: red.reduced.iterations,
        converged: red.reduced.converged,
        gradient_norm: red.reduced.gradient_norm(),
        reduced_cost: red.reduced.cost,
        adapt_sweeps,
        pde_solves,
        ode_solves: red.reduced.sweeps,
        timings,
        fine,
        state_pod: red.y,
        state_exact,
        history,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// P1 field with the boundary zeros added, for plotting.
fn write_field(dir: &Path, name: &str, fine: &SpatialGrid, traj: &Trajectory) -> Result<()> {
    let padded = traj.map(|v| {
        let mut w = nalgebra::DVector::zeros(v.len() + 2);
        w.rows_mut(1, v.len()).copy_from(v);
        w
    });
    padded.write_csv(create(dir, name)?, &fine.nodes())
}

impl ExperimentReport {
    /// Deterministic summary rows.
    pub fn summary(&self) -> Vec<(&'static str, String)> {
        vec![
            ("config_hash", self.config_hash.clone()),
            ("grid_mode", format!("{:?}", self.config.grid_mode).to_lowercase()),
            ("dof", self.grid.dof().to_string()),
            ("min_dt", format!("{:e}", self.grid.increments().iter().copied().fold(f64::MAX, f64::min))),
            ("rank", self.basis.rank().to_string()),
            ("numerical_rank", self.basis.numerical_rank.to_string()),
            ("energy_ratio", format!("{:e}", self.basis.energy_ratio())),
            ("eps_y", format!("{:e}", self.eps_y)),
            ("eps_u", format!("{:e}", self.eps_u)),
            ("reduced_cost", format!("{:e}", self.reduced_cost)),
            ("iterations", self.iterations.to_string()),
            ("converged", self.converged.to_string()),
            ("gradient_norm", format!("{:e}", self.gradient_norm)),
            ("adapt_sweeps", self.adapt_sweeps.to_string()),
            ("pde_solves", self.pde_solves.to_string()),
            ("ode_solves", self.ode_solves.to_string()),
        ]
    }

    /// Write report, grid, spectrum, fields, history and timings into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut out = create(dir, "report.csv")?;
        writeln!(out, "key,value")?;
        for (k, v) in self.summary() {
            writeln!(out, "{k},{v}")?;
        }
        out.flush()?;
        self.grid.write_csv(create(dir, "grid.csv")?)?;
        self.basis.write_spectrum_csv(create(dir, "spectrum.csv")?)?;
        write_field(dir, "state_pod.csv", &self.fine, &self.state_pod)?;
        write_field(dir, "state_exact.csv", &self.fine, &self.state_exact)?;
        if let Some(est) = &self.estimator {
            est.write_csv(create(dir, "estimator.csv")?)?;
        }
        let mut hist = create(dir, "convergence.csv")?;
        writeln!(hist, "iteration,objective,gradient_norm")?;
        for (k, (j, g)) in self.history.iter().enumerate() {
            writeln!(hist, "{k},{j:e},{g:e}")?;
        }
        hist.flush()?;
        let mut tim = create(dir, "timings.csv")?;
        writeln!(tim, "stage,seconds")?;
        for (s, t) in &self.timings {
            writeln!(tim, "{s},{t:e}")?;
        }
        tim.flush()?;
        Ok(())
    }
}

/// Equidistant interval counts of the comparison.
pub const EQUIDISTANT_SIZES: [usize; 4] = [20, 46, 82, 108];
/// Adaptive dof budgets of the comparison.
pub const ADAPTIVE_DOFS: [usize; 4] = [21, 47, 83, 109];

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    /// Interval count (equidistant) or dof (adaptive).
    pub size: usize,
    pub eps_y: f64,
    pub eps_u: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub equidistant: Vec<TableRow>,
    pub adaptive: Vec<TableRow>,
}

/// Run the equidistant and adaptive experiment matrix in parallel.
pub fn compare_grids(base: &ExperimentConfig) -> Result<Comparison> {
    compare_grids_with(base, &EQUIDISTANT_SIZES, &ADAPTIVE_DOFS)
}

pub fn compare_grids_with(base: &ExperimentConfig, sizes: &[usize], dofs: &[usize]) -> Result<Comparison> {
    let mut cells: Vec<ExperimentConfig> = Vec::new();
    for &n in sizes {
        cells.push(ExperimentConfig { grid_mode: GridMode::Equidistant, n, ..base.clone() });
    }
    for &dof in dofs {
        cells.push(ExperimentConfig { grid_mode: GridMode::Adaptive, dof, ..base.clone() });
    }
    let rows = cells
        .par_iter()
        .map(|c| {
            run_algorithm1(c).map(|r| TableRow {
                size: if c.grid_mode == GridMode::Adaptive { c.dof } else { c.n },
                eps_y: r.eps_y,
                eps_u: r.eps_u,
                iterations: r.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let adaptive = rows[sizes.len()..].to_vec();
    let mut equidistant = rows;
    equidistant.truncate(sizes.len());
    Ok(Comparison { equidistant, adaptive })
}

impl Comparison {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut t1 = create(dir, "table1.csv")?;
        writeln!(t1, "n,dt,eps_y,eps_u,iterations")?;
        for r in &self.equidistant {
            writeln!(t1, "{},{:e},{:e},{:e},{}", r.size, 1.0 / r.size as f64, r.eps_y, r.eps_u, r.iterations)?;
        }
        t1.flush()?;
        let mut t2 = create(dir, "table2.csv")?;
        writeln!(t2, "dof,eps_y,eps_u,iterations,improvement_y")?;
        for (k, r) in self.adaptive.iter().enumerate() {
            let gain = self.equidistant.get(k).map_or(f64::NAN, |e| e.eps_y / r.eps_y);
            writeln!(t2, "{},{:e},{:e},{},{:e}", r.size, r.eps_y, r.eps_u, r.iterations, gain)?;
        }
        t2.flush()?;
        Ok(())
    }
}

/// Adaptive time grid of the manufactured problem for a coarse width and budget.
pub fn grid_dump(cfg: &ExperimentConfig, dx: f64, dof: usize) -> Result<spacetime::Adapted> {
    let coarse = SpatialGrid::with_width(dx)?;
    if dof < 2 {
        return invalid("dof must be at least 2");
    }
    let problem = manufactured(cfg.eps, cfg.alpha, cfg.nu)?;
    let data = problem.spacetime_data(cfg.include_f_in_spacetime, cfg.t_final);
    spacetime::adapt(&coarse, cfg.alpha, cfg.nu, &data, dof, cfg.adapt_options())
}
