//! Uniform spatial grids on (0,1) and non-uniform time grids on [0,T].

use std::io::Write;

use crate::error::{invalid, Result};

/// Uniform mesh of the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    n_cells: usize,
}

impl SpatialGrid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return invalid("spatial grid needs at least one cell");
        }
        Ok(Self { n_cells })
    }

    /// Grid with cell width `h`, which must divide 1.
    pub fn with_width(h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return invalid(format!("cell width {h} outside (0,1]"));
        }
        let n = (1.0 / h).round();
        if (n * h - 1.0).abs() > 1e-9 {
            return invalid(format!("cell width {h} does not divide the unit interval"));
        }
        Self::new(n as usize)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            1.0
        } else {
            i as f64 / self.n_cells as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    /// Nodes strictly inside (0,1).
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n_cells).map(|i| self.node(i)).collect()
    }
}

/// Partition 0 = t_0 < t_1 < ... < t_n = T.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return invalid("time grid needs at least two points");
        }
        if points[0] != 0.0 {
            return invalid("time grid must start at 0");
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("time grid points must be strictly increasing");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of time points, n + 1.
    pub fn dof(&self) -> usize {
        self.points.len()
    }

    /// Number of intervals n.
    pub fn n_intervals(&self) -> usize {
        self.points.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Increment of interval `j` in 1..=n.
    pub fn dt(&self, j: usize) -> f64 {
        self.points[j] - self.points[j - 1]
    }

    pub fn increments(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t")?;
        for t in &self.points {
            writeln!(out, "{t:e}")?;
        }
        Ok(())
    }
}

/// Equidistant grid with `n` intervals on [0, T].
pub fn uniform_time_grid(t_final: f64, n: usize) -> Result<TimeGrid> {
    if n == 0 || !(t_final > 0.0) {
        return invalid(format!("uniform grid needs n >= 1 and T > 0, got n={n}, T={t_final}"));
    }
    let mut points: Vec<f64> = (0..=n).map(|j| j as f64 * t_final / n as f64).collect();
    points[n] = t_final;
    TimeGrid::from_points(points)
}

/// Bisect the intervals with the given 1-based indices.
pub fn bisect_marked(grid: &TimeGrid, marked: &[usize]) -> Result<TimeGrid> {
    let n = grid.n_intervals();
    let mut flag = vec![false; n + 1];
    for &j in marked {
        if j == 0 || j > n {
            return invalid(format!("interval index {j} outside 1..={n}"));
        }
        flag[j] = true;
    }
    let p = grid.points();
    let mut points = Vec::with_capacity(p.len() + marked.len());
    points.push(p[0]);
    for j in 1..=n {
        if flag[j] {
            points.push(0.5 * (p[j - 1] + p[j]));
        }
        points.push(p[j]);
    }
    TimeGrid::from_points(points)
}

/// Composite trapezoid weights beta_0..beta_n.
pub fn trapezoidal_weights(grid: &TimeGrid) -> Vec<f64> {
    let n = grid.n_intervals();
    let mut w = vec![0.0; n + 1];
    for j in 1..=n {
        let half = 0.5 * grid.dt(j);
        w[j - 1] += half;
        w[j] += half;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn uniform_unit_interval_twenty() {
        let g = uniform_time_grid(1.0, 20).unwrap();
        assert_eq!(g.dof(), 21);
        assert_eq!(g.points()[1], 0.05);
        assert_eq!(g.final_time(), 1.0);
        assert!(g.increments().iter().all(|d| (d - 0.05).abs() < 1e-15));
    }

    #[test]
    fn uniform_single_interval() {
        assert_eq!(uniform_time_grid(1.0, 1).unwrap().points(), &[0.0, 1.0]);
    }

    #[test]
    fn uniform_final_time_two() {
        let g = uniform_time_grid(2.0, 4).unwrap();
        assert!(close(g.points(), &[0.0, 0.5, 1.0, 1.5, 2.0], 0.0));
    }

    #[test]
    fn uniform_rejects_bad_input() {
        assert!(uniform_time_grid(1.0, 0).is_err());
        assert!(uniform_time_grid(0.0, 3).is_err());
        assert!(uniform_time_grid(-1.0, 3).is_err());
    }

    #[test]
    fn bisect_second_interval() {
        let g = TimeGrid::from_points(vec![0.0, 0.5, 1.0]).unwrap();
        let r = bisect_marked(&g, &[2]).unwrap();
        assert_eq!(r.points(), &[0.0, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn bisect_nothing_is_identity() {
        let g = TimeGrid::from_points(vec![0.0, 0.3, 0.7, 1.0]).unwrap();
        assert_eq!(bisect_marked(&g, &[]).unwrap(), g);
    }

    #[test]
    fn bisect_single_interval() {
        let g = uniform_time_grid(1.0, 1).unwrap();
        assert_eq!(bisect_marked(&g, &[1]).unwrap().points(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn bisect_rejects_out_of_range() {
        let g = uniform_time_grid(1.0, 2).unwrap();
        assert!(bisect_marked(&g, &[3]).is_err());
        assert!(bisect_marked(&g, &[0]).is_err());
    }

    #[test]
    fn trapezoid_uniform_quarter() {
        let w = trapezoidal_weights(&uniform_time_grid(1.0, 4).unwrap());
        assert!(close(&w, &[0.125, 0.25, 0.25, 0.25, 0.125], 1e-15));
    }

    #[test]
    fn trapezoid_nonuniform_hand_values() {
        let g = TimeGrid::from_points(vec![0.0, 0.5, 0.75, 1.0]).unwrap();
        assert!(close(&trapezoidal_weights(&g), &[0.25, 0.375, 0.25, 0.125], 1e-15));
    }

    #[test]
    fn spatial_grid_nodes() {
        let g = SpatialGrid::with_width(0.2).unwrap();
        assert_eq!(g.n_cells(), 5);
        let x = g.nodes();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[5], 1.0);
        for w in x.windows(2) {
            assert!((w[1] - w[0] - g.h()).abs() <= 1e-14);
        }
        assert!(SpatialGrid::with_width(0.3).is_err());
    }

    #[test]
    fn time_grid_rejects_unsorted() {
        assert!(TimeGrid::from_points(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::from_points(vec![0.1, 1.0]).is_err());
    }
}
