//! Full-order optimal control of the manufactured problem by steepest descent.

use snaploc::fem1d::{assemble_p1, interpolate_p1, Trajectory};
use snaploc::grid::{uniform_time_grid, SpatialGrid};
use snaploc::optctrl::{solve_ocp, Ocp};
use snaploc::pipeline::error_metrics;
use snaploc::problem::manufactured;

fn main() -> snaploc::Result<()> {
    let problem = manufactured(1e-3, 1.0, 1.0)?;
    let space = SpatialGrid::with_width(0.01)?;
    let grid = uniform_time_grid(1.0, 46)?;
    let ops = assemble_p1(&space)?;
    let mass = ops.mass.clone();
    let sample = |g: &dyn Fn(f64, f64) -> f64| Trajectory::from_fn(&grid, |t| interpolate_p1(&space, |x| g(x, t)));
    let f = sample(&|x, t| problem.f(x, t));
    let y_d = sample(&|x, t| problem.y_d(x, t));
    let y0 = interpolate_p1(&space, |x| problem.y0(x));
    let prob = Ocp::new(ops, grid.clone(), 1.0, 1.0, y0, f, y_d)?;
    let sol = solve_ocp(&prob, 1e-6, 50)?;
    for (k, (j, g)) in sol.objective_history.iter().zip(&sol.gradient_history).enumerate() {
        println!("iter {k}: objective {j:.8e}  gradient {g:.3e}");
    }
    let (ey, eu) = error_metrics(&sol.y, &sol.u, &problem, &space, &mass)?;
    println!("eps_y {ey:.4e}  eps_u {eu:.4e}");
    Ok(())
}
