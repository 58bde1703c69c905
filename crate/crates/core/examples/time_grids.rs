//! Uniform grids, bisection of marked intervals and trapezoid weights.

use snaploc::grid::{bisect_marked, trapezoidal_weights, uniform_time_grid};

fn main() -> snaploc::Result<()> {
    let grid = uniform_time_grid(1.0, 4)?;
    let refined = bisect_marked(&grid, &[2, 3])?;
    println!("uniform  {:?}", grid.points());
    println!("refined  {:?}", refined.points());
    println!("weights  {:?}", trapezoidal_weights(&refined));
    Ok(())
}
