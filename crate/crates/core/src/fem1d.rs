//! Finite elements on the unit interval: P1 for the heat equation, C1 cubic
//! Hermite for the fourth-order space-time problem. Homogeneous Dirichlet
//! values are eliminated in both spaces.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SMatrix};

use crate::error::{invalid, Result};
use crate::grid::{trapezoidal_weights, SpatialGrid, TimeGrid};

/// Value and first x-derivative of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub slope: f64,
}

impl Jet {
    pub fn new(value: f64, slope: f64) -> Self {
        Self { value, slope }
    }
}

/// Mass and stiffness pair of a Galerkin space; shared by full and reduced models.
pub trait MassStiffness {
    fn mass(&self) -> &DMatrix<f64>;
    fn stiffness(&self) -> &DMatrix<f64>;
    fn dim(&self) -> usize {
        self.mass().nrows()
    }
}

/// P1 operators on the interior nodes.
#[derive(Debug, Clone)]
pub struct P1Ops {
    pub grid: SpatialGrid,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
}

impl MassStiffness for P1Ops {
    fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }
    fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }
}

pub fn assemble_p1(grid: &SpatialGrid) -> Result<P1Ops> {
    let nc = grid.n_cells();
    if nc < 2 {
        return invalid("P1 assembly needs at least two cells");
    }
    let h = grid.h();
    let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
    let ke = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    let n = nc - 1;
    let mut mass = DMatrix::zeros(n, n);
    let mut stiffness = DMatrix::zeros(n, n);
    // full node i maps to interior index i - 1
    for e in 0..nc {
        for a in 0..2 {
            for b in 0..2 {
                let (ia, ib) = (e + a, e + b);
                if ia == 0 || ia == nc || ib == 0 || ib == nc {
                    continue;
                }
                mass[(ia - 1, ib - 1)] += me[a][b];
                stiffness[(ia - 1, ib - 1)] += ke[a][b];
            }
        }
    }
    Ok(P1Ops { grid: grid.clone(), mass, stiffness })
}

const GAUSS4_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_87,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GAUSS4_W: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

/// Hermite shape functions on an element of width `h` at local coordinate `s` in [0,1],
/// dof order (v0, v0', v1, v1'). Returns (N, dN/dx, d2N/dx2).
fn hermite_shape(s: f64, h: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    let n = [1.0 - 3.0 * s2 + 2.0 * s3, h * (s - 2.0 * s2 + s3), 3.0 * s2 - 2.0 * s3, h * (s3 - s2)];
    let d = [
        (-6.0 * s + 6.0 * s2) / h,
        1.0 - 4.0 * s + 3.0 * s2,
        (6.0 * s - 6.0 * s2) / h,
        3.0 * s2 - 2.0 * s,
    ];
    let dd = [
        (-6.0 + 12.0 * s) / (h * h),
        (-4.0 + 6.0 * s) / h,
        (6.0 - 12.0 * s) / (h * h),
        (6.0 * s - 2.0) / h,
    ];
    (n, d, dd)
}

/// Element mass, stiffness and bending matrices for width `h` by 4-point Gauss (exact).
pub fn hermite_element(h: f64) -> [SMatrix<f64, 4, 4>; 3] {
    let mut out = [SMatrix::<f64, 4, 4>::zeros(); 3];
    for (&s, &w) in GAUSS4_X.iter().zip(&GAUSS4_W) {
        let (n, d, dd) = hermite_shape(s, h);
        for a in 0..4 {
            for b in 0..4 {
                out[0][(a, b)] += w * h * n[a] * n[b];
                out[1][(a, b)] += w * h * d[a] * d[b];
                out[2][(a, b)] += w * h * dd[a] * dd[b];
            }
        }
    }
    out.map(|m| (m + m.transpose()) * 0.5)
}

/// Cubic Hermite operators with y(0) = y(1) = 0 eliminated.
///
/// Kept dof order: (v0', v1, v1', ..., v_{n-1}, v_{n-1}', v_n').
#[derive(Debug, Clone)]
pub struct HermiteOps {
    pub grid: SpatialGrid,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub bending: DMatrix<f64>,
    /// Functional returning y''(0).
    pub d2_left: DVector<f64>,
    /// Functional returning y''(1).
    pub d2_right: DVector<f64>,
}

fn hermite_kept(full: usize, nc: usize) -> Option<usize> {
    if full == 0 || full == 2 * nc {
        None
    } else if full < 2 * nc {
        Some(full - 1)
    } else {
        Some(full - 2)
    }
}

pub fn assemble_hermite(grid: &SpatialGrid) -> HermiteOps {
    let nc = grid.n_cells();
    let h = grid.h();
    let dim = 2 * nc;
    let [me, ke, be] = hermite_element(h);
    let mut mass = DMatrix::zeros(dim, dim);
    let mut stiffness = DMatrix::zeros(dim, dim);
    let mut bending = DMatrix::zeros(dim, dim);
    for e in 0..nc {
        for a in 0..4 {
            let Some(ia) = hermite_kept(2 * e + a, nc) else { continue };
            for b in 0..4 {
                let Some(ib) = hermite_kept(2 * e + b, nc) else { continue };
                mass[(ia, ib)] += me[(a, b)];
                stiffness[(ia, ib)] += ke[(a, b)];
                bending[(ia, ib)] += be[(a, b)];
            }
        }
    }
    let mut d2_left = DVector::zeros(dim);
    let mut d2_right = DVector::zeros(dim);
    let (_, _, dd0) = hermite_shape(0.0, h);
    let (_, _, dd1) = hermite_shape(1.0, h);
    for a in 0..4 {
        if let Some(i) = hermite_kept(a, nc) {
            d2_left[i] += dd0[a];
        }
        if let Some(i) = hermite_kept(2 * (nc - 1) + a, nc) {
            d2_right[i] += dd1[a];
        }
    }
    HermiteOps { grid: grid.clone(), mass, stiffness, bending, d2_left, d2_right }
}

impl HermiteOps {
    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    fn full_dofs(&self, coeffs: &DVector<f64>) -> Vec<f64> {
        let nc = self.grid.n_cells();
        (0..2 * nc + 2)
            .map(|i| hermite_kept(i, nc).map_or(0.0, |k| coeffs[k]))
            .collect()
    }

    /// Evaluate the Hermite function with coefficients `coeffs` at `x`.
    pub fn evaluate(&self, coeffs: &DVector<f64>, x: f64) -> f64 {
        let nc = self.grid.n_cells();
        let h = self.grid.h();
        let full = self.full_dofs(coeffs);
        let e = ((x / h).floor() as usize).min(nc - 1);
        let (n, _, _) = hermite_shape(x / h - e as f64, h);
        (0..4).map(|a| n[a] * full[2 * e + a]).sum()
    }

    /// Nodal values at all grid nodes, boundary included.
    pub fn nodal_values(&self, coeffs: &DVector<f64>) -> Vec<f64> {
        let full = self.full_dofs(coeffs);
        (0..=self.grid.n_cells()).map(|i| full[2 * i]).collect()
    }
}

/// P1 interpolant on the interior nodes.
pub fn interpolate_p1(grid: &SpatialGrid, f: impl Fn(f64) -> f64) -> DVector<f64> {
    DVector::from_iterator(grid.n_cells() - 1, grid.interior_nodes().into_iter().map(f))
}

/// Hermite interpolant from nodal values and derivatives.
pub fn interpolate_hermite(grid: &SpatialGrid, f: impl Fn(f64) -> Jet) -> DVector<f64> {
    let nc = grid.n_cells();
    let mut v = DVector::zeros(2 * nc);
    for i in 0..=nc {
        let jet = f(grid.node(i));
        if let Some(k) = hermite_kept(2 * i, nc) {
            v[k] = jet.value;
        }
        if let Some(k) = hermite_kept(2 * i + 1, nc) {
            v[k] = jet.slope;
        }
    }
    v
}

/// Evaluate a coarse P1 function at the interior nodes of a nested fine grid.
pub fn prolongate(v: &DVector<f64>, coarse: &SpatialGrid, fine: &SpatialGrid) -> Result<DVector<f64>> {
    let (nc, nf) = (coarse.n_cells(), fine.n_cells());
    if nf % nc != 0 {
        return invalid(format!("fine grid ({nf} cells) is not nested in coarse grid ({nc} cells)"));
    }
    if v.len() != nc - 1 {
        return invalid("coarse vector has wrong length");
    }
    let r = nf / nc;
    let value = |i: usize| if i == 0 || i == nc { 0.0 } else { v[i - 1] };
    let out = (1..nf).map(|k| {
        let (e, off) = (k / r, k % r);
        if off == 0 {
            value(e)
        } else {
            let s = off as f64 / r as f64;
            (1.0 - s) * value(e) + s * value(e + 1)
        }
    });
    Ok(DVector::from_iterator(nf - 1, out))
}

/// One spatial coefficient vector per time point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub values: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: Vec<DVector<f64>>) -> Result<Self> {
        if values.len() != grid.dof() {
            return invalid(format!("{} vectors for {} time points", values.len(), grid.dof()));
        }
        if let Some(v) = values.first() {
            if values.iter().any(|w| w.len() != v.len()) {
                return invalid("trajectory vectors differ in dimension");
            }
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &TimeGrid, dim: usize) -> Self {
        Self { grid: grid.clone(), values: vec![DVector::zeros(dim); grid.dof()] }
    }

    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> DVector<f64>) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(&DVector<f64>) -> DVector<f64>) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(f).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Trajectory) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b * c).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Trajectory) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn check_compatible(&self, other: &Trajectory) -> Result<()> {
        if self.grid != other.grid {
            return invalid("trajectories live on different time grids");
        }
        if self.dim() != other.dim() {
            return invalid("trajectories differ in spatial dimension");
        }
        Ok(())
    }

    /// CSV: first row time points, first column node coordinates, body values.
    pub fn write_csv<W: Write>(&self, mut out: W, nodes: &[f64]) -> Result<()> {
        if nodes.len() != self.dim() {
            return invalid("node list does not match trajectory dimension");
        }
        write!(out, "x\\t")?;
        for t in self.grid.points() {
            write!(out, ",{t:e}")?;
        }
        writeln!(out)?;
        for (i, x) in nodes.iter().enumerate() {
            write!(out, "{x:e}")?;
            for v in &self.values {
                write!(out, ",{:e}", v[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Time-trapezoid, space-exact L2(0,T; L2) norm.
pub fn spacetime_l2_norm(traj: &Trajectory, mass: &DMatrix<f64>) -> Result<f64> {
    if traj.dim() != mass.nrows() {
        return invalid("trajectory dimension does not match mass matrix");
    }
    let beta = trapezoidal_weights(&traj.grid);
    let s: f64 = traj.values.iter().zip(&beta).map(|(v, b)| b * v.dot(&(mass * v))).sum();
    Ok(s.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_time_grid;
    use std::f64::consts::PI;

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn p1_two_cells() {
        let ops = assemble_p1(&SpatialGrid::new(2).unwrap()).unwrap();
        assert!((ops.mass[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((ops.stiffness[(0, 0)] - 4.0).abs() < 1e-13);
    }

    #[test]
    fn p1_four_cells_mass() {
        let ops = assemble_p1(&SpatialGrid::new(4).unwrap()).unwrap();
        for i in 0..3 {
            assert!((ops.mass[(i, i)] - 1.0 / 6.0).abs() < 1e-15);
        }
        assert!((ops.mass[(0, 1)] - 1.0 / 24.0).abs() < 1e-15);
        assert!((ops.mass[(1, 2)] - 1.0 / 24.0).abs() < 1e-15);
        assert_eq!(ops.mass[(0, 2)], 0.0);
    }

    #[test]
    fn p1_uniform_closed_form() {
        let g = SpatialGrid::new(10).unwrap();
        let h = g.h();
        let ops = assemble_p1(&g).unwrap();
        for i in 0..9usize {
            for j in 0..9 {
                let (m, a) = match i.abs_diff(j) {
                    0 => (4.0 * h / 6.0, 2.0 / h),
                    1 => (h / 6.0, -1.0 / h),
                    _ => (0.0, 0.0),
                };
                assert!((ops.mass[(i, j)] - m).abs() < 1e-13);
                assert!((ops.stiffness[(i, j)] - a).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn p1_needs_interior_node() {
        assert!(assemble_p1(&SpatialGrid::new(1).unwrap()).is_err());
    }

    #[test]
    fn p1_discrete_sine_is_generalized_eigenvector() {
        let g = SpatialGrid::new(16).unwrap();
        let ops = assemble_p1(&g).unwrap();
        let s = interpolate_p1(&g, |x| (PI * x).sin());
        let a = &ops.stiffness * &s;
        let m = &ops.mass * &s;
        let lam = s.dot(&a) / s.dot(&m);
        assert!((a - m * lam).norm() <= 1e-12 * lam * s.norm());
    }

    #[test]
    fn hermite_element_closed_forms() {
        let h = 0.3;
        let [me, ke, be] = hermite_element(h);
        let h2 = h * h;
        let m = SMatrix::<f64, 4, 4>::from_row_slice(&[
            156.0, 22.0 * h, 54.0, -13.0 * h,
            22.0 * h, 4.0 * h2, 13.0 * h, -3.0 * h2,
            54.0, 13.0 * h, 156.0, -22.0 * h,
            -13.0 * h, -3.0 * h2, -22.0 * h, 4.0 * h2,
        ]) * (h / 420.0);
        let k = SMatrix::<f64, 4, 4>::from_row_slice(&[
            36.0, 3.0 * h, -36.0, 3.0 * h,
            3.0 * h, 4.0 * h2, -3.0 * h, -h2,
            -36.0, -3.0 * h, 36.0, -3.0 * h,
            3.0 * h, -h2, -3.0 * h, 4.0 * h2,
        ]) / (30.0 * h);
        let b = SMatrix::<f64, 4, 4>::from_row_slice(&[
            12.0, 6.0 * h, -12.0, 6.0 * h,
            6.0 * h, 4.0 * h2, -6.0 * h, 2.0 * h2,
            -12.0, -6.0 * h, 12.0, -6.0 * h,
            6.0 * h, 2.0 * h2, -6.0 * h, 4.0 * h2,
        ]) / (h * h2);
        assert!((me - m).abs().max() < 1e-14);
        assert!((ke - k).abs().max() < 1e-12);
        assert!((be - b).abs().max() < 1e-9);
    }

    #[test]
    fn hermite_bending_of_parabola() {
        let g = SpatialGrid::new(7).unwrap();
        let ops = assemble_hermite(&g);
        let u = interpolate_hermite(&g, |x| Jet::new(x * (1.0 - x), 1.0 - 2.0 * x));
        assert!((u.dot(&(&ops.bending * &u)) - 4.0).abs() < 1e-10);
        assert!((ops.d2_left.dot(&u) + 2.0).abs() < 1e-10);
        assert!((ops.d2_right.dot(&u) + 2.0).abs() < 1e-10);
    }

    #[test]
    fn hermite_matrices_symmetric_and_definite() {
        let ops = assemble_hermite(&SpatialGrid::new(6).unwrap());
        for m in [&ops.mass, &ops.stiffness, &ops.bending] {
            assert_eq!(max_abs(&(m - m.transpose())), 0.0);
            assert!(m.clone().cholesky().is_some());
        }
        assert_eq!(ops.dim(), 12);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let g = SpatialGrid::new(5).unwrap();
        let ops = assemble_hermite(&g);
        let f = |x: f64| x * (1.0 - x) * (2.0 + 3.0 * x);
        let df = |x: f64| 2.0 + 2.0 * x - 9.0 * x * x;
        let c = interpolate_hermite(&g, |x| Jet::new(f(x), df(x)));
        for k in 0..100 {
            let x = k as f64 / 99.0;
            assert!((ops.evaluate(&c, x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_samples() {
        let g = SpatialGrid::new(4).unwrap();
        let v = interpolate_p1(&g, |x| (PI * x).sin());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - s).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && (v[2] - s).abs() < 1e-15);
        assert_eq!(interpolate_p1(&g, |_| 0.0).norm(), 0.0);
        assert_eq!(interpolate_hermite(&g, |_| Jet::default()).norm(), 0.0);
    }

    #[test]
    fn prolongation_cases() {
        let c = SpatialGrid::new(4).unwrap();
        let f = SpatialGrid::new(12).unwrap();
        let lin = |x: f64| if x <= 0.5 { x } else { 1.0 - x };
        let v = interpolate_p1(&c, lin);
        let p = prolongate(&v, &c, &f).unwrap();
        assert!((p - interpolate_p1(&f, lin)).amax() < 1e-15);
        assert_eq!(prolongate(&v, &c, &c).unwrap(), v);
        assert_eq!(prolongate(&DVector::zeros(3), &c, &f).unwrap().norm(), 0.0);
        assert!(prolongate(&v, &c, &SpatialGrid::new(10).unwrap()).is_err());
    }

    #[test]
    fn spacetime_norm_cases() {
        let g = SpatialGrid::new(200).unwrap();
        let ops = assemble_p1(&g).unwrap();
        let tg = uniform_time_grid(1.0, 400).unwrap();
        assert_eq!(spacetime_l2_norm(&Trajectory::zeros(&tg, 199), &ops.mass).unwrap(), 0.0);
        let v = interpolate_p1(&g, |x| x * x);
        let c = Trajectory::from_fn(&tg, |_| v.clone());
        let expect = v.dot(&(&ops.mass * &v)).sqrt();
        assert!((spacetime_l2_norm(&c, &ops.mass).unwrap() - expect).abs() < 1e-14);
        let s = interpolate_p1(&g, |x| (PI * x).sin());
        let tr = Trajectory::from_fn(&tg, |t| &s * t);
        let n = spacetime_l2_norm(&tr, &ops.mass).unwrap();
        assert!((n - (1.0f64 / 6.0).sqrt()).abs() < 1e-4);
        let n3 = spacetime_l2_norm(&tr.scale(-3.0), &ops.mass).unwrap();
        assert!((n3 - 3.0 * n).abs() < 1e-13);
    }
}
