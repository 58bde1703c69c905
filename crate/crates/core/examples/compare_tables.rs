//! Equidistant against adaptive time grids at matched sizes.

use snaploc::pipeline::{compare_grids, ExperimentConfig};

fn main() -> snaploc::Result<()> {
    let cmp = compare_grids(&ExperimentConfig::default())?;
    println!("{:>5} {:>11} {:>11} | {:>5} {:>11} {:>11} {:>7}", "n", "eps_y", "eps_u", "dof", "eps_y", "eps_u", "gain");
    for (e, a) in cmp.equidistant.iter().zip(&cmp.adaptive) {
        println!(
            "{:>5} {:>11.4e} {:>11.4e} | {:>5} {:>11.4e} {:>11.4e} {:>7.1}",
            e.size, e.eps_y, e.eps_u, a.size, a.eps_y, a.eps_u, e.eps_y / a.eps_y
        );
    }
    Ok(())
}
