//! Implicit Euler for the heat equation and its adjoint on arbitrary time grids.

use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::fem1d::{MassStiffness, Trajectory};
use crate::grid::TimeGrid;
use crate::linalg::EulerSteps;

/// Forward sweep: (M + dt_j nu A) y_j = M y_{j-1} + dt_j M forcing_j.
pub fn heat_sweep(
    ops: &impl MassStiffness,
    steps: &EulerSteps,
    forcing: &Trajectory,
    y0: &DVector<f64>,
) -> Trajectory {
    let tg = &forcing.grid;
    let m = ops.mass();
    let mut values = Vec::with_capacity(tg.dof());
    values.push(y0.clone());
    for j in 1..=tg.n_intervals() {
        let rhs = m * (&values[j - 1] + &forcing.values[j] * tg.dt(j));
        values.push(steps.solve(j, &rhs));
    }
    Trajectory { grid: tg.clone(), values }
}

/// Backward sweep: p_n = 0, (M + dt_j nu A) p_{j-1} = M p_j + dt_j M mismatch_{j-1}.
pub fn adjoint_sweep(ops: &impl MassStiffness, steps: &EulerSteps, mismatch: &Trajectory) -> Trajectory {
    let tg = &mismatch.grid;
    let n = tg.n_intervals();
    let m = ops.mass();
    let mut values = vec![DVector::zeros(ops.dim()); n + 1];
    for j in (1..=n).rev() {
        let rhs = m * (&values[j] + &mismatch.values[j - 1] * tg.dt(j));
        values[j - 1] = steps.solve(j, &rhs);
    }
    Trajectory { grid: tg.clone(), values }
}

fn check(ops: &impl MassStiffness, tg: &TimeGrid, trajs: &[&Trajectory]) -> Result<()> {
    for t in trajs {
        if &t.grid != tg {
            return invalid("trajectory is not sampled on the solver time grid");
        }
        if t.dim() != ops.dim() {
            return invalid(format!("trajectory dimension {} != operator dimension {}", t.dim(), ops.dim()));
        }
    }
    Ok(())
}

/// State equation y_t - nu y_xx = f + u with initial value y0.
pub fn solve_heat(
    ops: &impl MassStiffness,
    tg: &TimeGrid,
    nu: f64,
    f: &Trajectory,
    u: &Trajectory,
    y0: &DVector<f64>,
) -> Result<Trajectory> {
    check(ops, tg, &[f, u])?;
    if y0.len() != ops.dim() {
        return invalid("initial value has wrong dimension");
    }
    let steps = EulerSteps::new(ops, nu, tg)?;
    Ok(heat_sweep(ops, &steps, &f.axpy(1.0, u)?, y0))
}

/// Adjoint equation -p_t - nu p_xx = y - y_d with p(T) = 0.
pub fn solve_adjoint(
    ops: &impl MassStiffness,
    tg: &TimeGrid,
    nu: f64,
    y: &Trajectory,
    y_d: &Trajectory,
) -> Result<Trajectory> {
    check(ops, tg, &[y, y_d])?;
    let steps = EulerSteps::new(ops, nu, tg)?;
    Ok(adjoint_sweep(ops, &steps, &y.sub(y_d)?))
}
