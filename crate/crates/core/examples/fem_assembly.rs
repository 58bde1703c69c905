//! P1 and cubic Hermite matrices, checked against exact integrals.

use snaploc::fem1d::{assemble_hermite, assemble_p1, interpolate_hermite, interpolate_p1, Jet};
use snaploc::grid::SpatialGrid;

fn main() -> snaploc::Result<()> {
    let grid = SpatialGrid::new(10)?;
    let p1 = assemble_p1(&grid)?;
    let s = interpolate_p1(&grid, |x| (std::f64::consts::PI * x).sin());
    println!("P1 mass norm of sin(pi x)^2:   {:.6} (exact 0.5)", s.dot(&(&p1.mass * &s)));

    let herm = assemble_hermite(&grid);
    let q = interpolate_hermite(&grid, |x| Jet::new(x * (1.0 - x), 1.0 - 2.0 * x));
    println!("Hermite mass of x(1-x):        {:.12} (exact 1/30)", q.dot(&(&herm.mass * &q)));
    println!("Hermite stiffness of x(1-x):   {:.12} (exact 1/3)", q.dot(&(&herm.stiffness * &q)));
    println!("Hermite bending of x(1-x):     {:.12} (exact 4)", q.dot(&(&herm.bending * &q)));
    Ok(())
}
