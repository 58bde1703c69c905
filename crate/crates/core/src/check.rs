//! Built-in property suite behind the `check` command.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::fem1d::{assemble_hermite, assemble_p1, interpolate_hermite, Jet, Trajectory};
use crate::grid::{trapezoidal_weights, SpatialGrid, TimeGrid};
use crate::optctrl::{reduced_problem, Ocp};
use crate::pod::{compute_pod, projection_error};
use crate::problem::manufactured;
use crate::Result;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome { name, passed: worst <= tol, detail: format!("worst {worst:.3e} (limit {tol:.0e})") }
}

fn random_traj(rng: &mut StdRng, grid: &TimeGrid, dim: usize) -> Trajectory {
    let values = (0..grid.dof()).map(|_| DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))).collect();
    Trajectory { grid: grid.clone(), values }
}

/// Closed-form data satisfy state and adjoint equations on a 50 x 50 lattice.
pub fn manufactured_residuals() -> Result<f64> {
    let m = manufactured(1e-3, 1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        for k in 0..50 {
            let (x, t) = (i as f64 / 49.0, k as f64 / 49.0);
            worst = worst.max(m.state_residual(x, t).abs()).max(m.adjoint_residual(x, t).abs());
        }
    }
    Ok(worst)
}

/// Random snapshot set with a random SPD weight, as used by the POD identity check.
pub fn random_pod_case(rng: &mut StdRng) -> (Trajectory, Vec<f64>, DMatrix<f64>, usize) {
    let dim = rng.gen_range(2..=30);
    let k = rng.gen_range(1..=12);
    let mut pts: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..1.0)).collect();
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let grid = TimeGrid::from_points(pts).expect("sorted distinct points");
    let snaps = random_traj(rng, &grid, dim);
    let beta = trapezoidal_weights(&grid);
    let r = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let w = &r * r.transpose() + DMatrix::identity(dim, dim) * 0.1;
    let l = rng.gen_range(1..=dim.min(grid.dof()));
    (snaps, beta, w, l)
}

/// Worst relative gap between the projection error and the neglected eigenvalues.
pub fn pod_identity(trials: usize, seed: u64) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (snaps, beta, w, l) = random_pod_case(&mut rng);
        let basis = compute_pod(&snaps, &beta, &w, l)?;
        let total: f64 = basis.eigenvalues.iter().sum();
        let tail: f64 = basis.eigenvalues[basis.rank()..].iter().sum();
        let err = projection_error(&snaps, &beta, &w, &basis)?;
        worst = worst.max((err - tail).abs() / total);
    }
    Ok(worst)
}

/// Small random control problem on a non-uniform grid.
pub fn random_ocp(seed: u64) -> Result<crate::optctrl::OcpProblem> {
    let mut rng = StdRng::seed_from_u64(seed);
    let ops = assemble_p1(&SpatialGrid::new(16)?)?;
    let mut pts: Vec<f64> = (0..10).map(|_| rng.gen_range(0.0..1.0)).collect();
    pts.extend([0.0, 1.0]);
    pts.sort_by(f64::total_cmp);
    let grid = TimeGrid::from_points(pts)?;
    let f = random_traj(&mut rng, &grid, 15);
    let y_d = random_traj(&mut rng, &grid, 15);
    let y0 = DVector::from_fn(15, |_, _| rng.gen_range(-1.0..1.0));
    Ocp::new(ops, grid, 1.0, 0.7, y0, f, y_d)
}

fn fd_worst<O: crate::fem1d::MassStiffness>(ocp: &Ocp<O>, rng: &mut StdRng, directions: usize) -> Result<f64> {
    let dim = ocp.ops.dim();
    let u = random_traj(rng, &ocp.grid, dim);
    let g = ocp.gradient(&u)?;
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let du = random_traj(rng, &ocp.grid, dim);
        let e = 1e-4;
        let fd = (ocp.objective(&u.axpy(e, &du)?)? - ocp.objective(&u.axpy(-e, &du)?)?) / (2.0 * e);
        let an = ocp.pairing(&g, &du);
        worst = worst.max((fd - an).abs() / an.abs());
    }
    Ok(worst)
}

/// Worst relative finite-difference mismatch of the full and reduced gradients.
pub fn gradient_check(directions: usize, seed: u64) -> Result<(f64, f64)> {
    let prob = random_ocp(seed)?;
    let mut rng = StdRng::seed_from_u64(seed + 1);
    let full = fd_worst(&prob, &mut rng, directions)?;
    let snaps = prob.state(&prob.zero_control())?;
    let basis = compute_pod(&snaps, &trapezoidal_weights(&snaps.grid), &prob.ops.mass, 4)?;
    let (red, _) = reduced_problem(&prob, &basis)?;
    let reduced = fd_worst(&red, &mut rng, directions)?;
    Ok((full, reduced))
}

/// Bending energy of x(1-x) on a Hermite grid, exactly 4.
pub fn bending_energy_check() -> f64 {
    let g = SpatialGrid::new(9).expect("valid grid");
    let ops = assemble_hermite(&g);
    let u = interpolate_hermite(&g, |x| Jet::new(x * (1.0 - x), 1.0 - 2.0 * x));
    (u.dot(&(&ops.bending * &u)) - 4.0).abs()
}

pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    let (full, reduced) = gradient_check(10, 2024)?;
    Ok(vec![
        outcome("manufactured residuals", manufactured_residuals()?, 1e-12),
        outcome("POD error identity", pod_identity(100, 7)?, 1e-10),
        outcome("full gradient vs finite differences", full, 1e-5),
        outcome("reduced gradient vs finite differences", reduced, 1e-5),
        outcome("Hermite bending energy", bending_energy_check(), 1e-10),
    ])
}
