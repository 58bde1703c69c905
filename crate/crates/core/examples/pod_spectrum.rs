//! POD spectrum of controlled and uncontrolled heat snapshots.

use snaploc::fem1d::{assemble_p1, interpolate_p1, Trajectory};
use snaploc::grid::{trapezoidal_weights, uniform_time_grid, SpatialGrid};
use snaploc::parabolic::solve_heat;
use snaploc::pod::compute_pod;

fn main() -> snaploc::Result<()> {
    let space = SpatialGrid::new(50)?;
    let ops = assemble_p1(&space)?;
    let grid = uniform_time_grid(1.0, 40)?;
    let y0 = interpolate_p1(&space, |x| x * (1.0 - x));
    let zero = Trajectory::zeros(&grid, ops.mass.nrows());
    let moving = Trajectory::from_fn(&grid, |t| interpolate_p1(&space, |x| (-50.0 * (x - t).powi(2)).exp()));
    for (name, f) in [("free decay", &zero), ("moving source", &moving)] {
        let snaps = solve_heat(&ops, &grid, 1.0, f, &zero, &y0)?;
        let basis = compute_pod(&snaps, &trapezoidal_weights(&grid), &ops.mass, 5)?;
        let lead: Vec<String> = basis.eigenvalues.iter().take(5).map(|l| format!("{l:.2e}")).collect();
        println!("{name:>14}: lambda {}  energy(5) {:.10}", lead.join(" "), basis.energy_ratio());
    }
    Ok(())
}
