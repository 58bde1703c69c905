//! POD reduced control compared with the full-order solution.

use snaploc::fem1d::{assemble_p1, interpolate_p1, spacetime_l2_norm, Trajectory};
use snaploc::grid::{trapezoidal_weights, uniform_time_grid, SpatialGrid};
use snaploc::optctrl::{solve_ocp, solve_reduced_ocp, Ocp};
use snaploc::pod::compute_pod;
use snaploc::problem::manufactured;

fn main() -> snaploc::Result<()> {
    let problem = manufactured(1e-3, 1.0, 1.0)?;
    let space = SpatialGrid::with_width(0.02)?;
    let grid = uniform_time_grid(1.0, 40)?;
    let ops = assemble_p1(&space)?;
    let mass = ops.mass.clone();
    let sample = |g: &dyn Fn(f64, f64) -> f64| Trajectory::from_fn(&grid, |t| interpolate_p1(&space, |x| g(x, t)));
    let f = sample(&|x, t| problem.f(x, t));
    let y_d = sample(&|x, t| problem.y_d(x, t));
    let y0 = interpolate_p1(&space, |x| problem.y0(x));
    let prob = Ocp::new(ops, grid.clone(), 1.0, 1.0, y0, f, y_d)?;
    let full = solve_ocp(&prob, 1e-8, 50)?;
    let snaps = prob.state(&prob.zero_control())?;
    let basis = compute_pod(&snaps, &trapezoidal_weights(&grid), &mass, 3)?;
    let red = solve_reduced_ocp(&prob, &basis, 1e-8, 50)?;
    let gap = spacetime_l2_norm(&red.u.sub(&full.u)?, &mass)? / spacetime_l2_norm(&full.u, &mass)?;
    println!("POD rank {} (requested {}), reduced iterations {}", basis.rank(), basis.requested, red.reduced.iterations);
    println!("relative control gap to full order: {gap:.3e}");
    Ok(())
}
