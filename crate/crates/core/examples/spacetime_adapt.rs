//! Residual-driven adaptive time grid of the manufactured control problem.

use snaploc::grid::SpatialGrid;
use snaploc::problem::manufactured;
use snaploc::spacetime::{adapt, AdaptOptions};

fn main() -> snaploc::Result<()> {
    let problem = manufactured(1e-3, 1.0, 1.0)?;
    let data = problem.spacetime_data(true, 1.0);
    let coarse = SpatialGrid::with_width(0.2)?;
    for dof in [21, 47, 83, 109] {
        let out = adapt(&coarse, 1.0, 1.0, &data, dof, AdaptOptions::default())?;
        let min_dt = out.grid.increments().iter().copied().fold(f64::MAX, f64::min);
        println!(
            "dof {dof:>4}: {} sweeps, min dt {min_dt:.3e}, estimator {:.3e}",
            out.sweeps,
            out.report.total()
        );
    }
    Ok(())
}
