//! Implicit Euler for the heat equation: decay of the first eigenmode.

use snaploc::fem1d::{assemble_p1, interpolate_p1, Trajectory};
use snaploc::grid::{uniform_time_grid, SpatialGrid};
use snaploc::parabolic::solve_heat;

fn main() -> snaploc::Result<()> {
    let space = SpatialGrid::new(100)?;
    let ops = assemble_p1(&space)?;
    let pi = std::f64::consts::PI;
    let y0 = interpolate_p1(&space, |x| (pi * x).sin());
    for n in [16, 64, 256, 1024] {
        let grid = uniform_time_grid(1.0, n)?;
        let zero = Trajectory::zeros(&grid, ops.mass.nrows());
        let y = solve_heat(&ops, &grid, 1.0, &zero, &zero, &y0)?;
        let mid = y.values[n][49];
        println!("n = {n:>5}  y(1/2, 1) = {mid:.6e}  exp(-pi^2) = {:.6e}", (-pi * pi).exp());
    }
    Ok(())
}
