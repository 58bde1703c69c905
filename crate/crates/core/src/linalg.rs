//! Dense factorizations used by the time steppers and the space-time solver.

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::fem1d::MassStiffness;
use crate::grid::TimeGrid;

/// Symmetric positive definite block-tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct BlockTridiag {
    /// Diagonal blocks D_0..D_n.
    pub diag: Vec<DMatrix<f64>>,
    /// Sub-diagonal blocks, `lower[k]` couples row block k+1 with column block k.
    pub lower: Vec<DMatrix<f64>>,
}

impl BlockTridiag {
    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let mut y: Vec<DVector<f64>> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for (k, e) in self.lower.iter().enumerate() {
            y[k + 1] += e * &x[k];
            y[k] += e.tr_mul(&x[k + 1]);
        }
        y
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.diag.iter().map(|d| (d - d.transpose()).amax()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.diag.iter().chain(&self.lower).map(|m| m.amax()).fold(0.0, f64::max)
    }

    /// Block Cholesky factorization.
    pub fn factor(&self) -> Result<BlockCholesky> {
        let n = self.n_blocks();
        let mut l = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n.saturating_sub(1));
        let mut d = self.diag[0].clone();
        for k in 0..n {
            let lk = Cholesky::new(d).ok_or(Error::NotPositiveDefinite("space-time block"))?.l();
            if k + 1 == n {
                l.push(lk);
                break;
            }
            // C_k = E_k L_k^{-T}
            let ck = lk.solve_lower_triangular(&self.lower[k].transpose()).unwrap().transpose();
            d = &self.diag[k + 1] - &ck * ck.transpose();
            c.push(ck);
            l.push(lk);
        }
        Ok(BlockCholesky { l, c })
    }
}

#[derive(Debug, Clone)]
pub struct BlockCholesky {
    l: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
}

impl BlockCholesky {
    pub fn solve(&self, b: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let n = self.l.len();
        let mut z: Vec<DVector<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut r = b[k].clone();
            if k > 0 {
                r -= &self.c[k - 1] * &z[k - 1];
            }
            z.push(self.l[k].solve_lower_triangular(&r).unwrap());
        }
        let mut x = z;
        for k in (0..n).rev() {
            if k + 1 < n {
                let corr = self.c[k].tr_mul(&x[k + 1]);
                x[k] -= corr;
            }
            x[k] = self.l[k].tr_solve_lower_triangular(&x[k]).unwrap();
        }
        x
    }
}

/// Cached Cholesky factors of M + dt*nu*A, one per distinct increment of a grid.
#[derive(Debug, Clone)]
pub struct EulerSteps {
    factors: Vec<Cholesky<f64, Dyn>>,
    /// factor index of interval j (1-based) at position j-1
    slot: Vec<usize>,
}

impl EulerSteps {
    pub fn new(ops: &impl MassStiffness, nu: f64, grid: &TimeGrid) -> Result<Self> {
        let mut index: HashMap<u64, usize> = HashMap::new();
        let mut factors = Vec::new();
        let mut slot = Vec::with_capacity(grid.n_intervals());
        for j in 1..=grid.n_intervals() {
            let dt = grid.dt(j);
            let k = *index.entry(dt.to_bits()).or_insert_with(|| factors.len());
            if k == factors.len() {
                let b = ops.mass() + ops.stiffness() * (dt * nu);
                factors.push(Cholesky::new(b).ok_or(Error::NotPositiveDefinite("M + dt nu A"))?);
            }
            slot.push(k);
        }
        Ok(Self { factors, slot })
    }

    /// Solve (M + dt_j nu A) x = rhs for interval j in 1..=n.
    pub fn solve(&self, j: usize, rhs: &DVector<f64>) -> DVector<f64> {
        self.factors[self.slot[j - 1]].solve(rhs)
    }

    pub fn distinct(&self) -> usize {
        self.factors.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::assemble_p1;
    use crate::grid::{SpatialGrid, TimeGrid};

    #[test]
    fn block_cholesky_matches_dense_solve() {
        let m = 3;
        let nb = 4;
        let mut diag = Vec::new();
        let mut lower = Vec::new();
        for k in 0..nb {
            diag.push(DMatrix::from_fn(m, m, |i, j| if i == j { 6.0 + k as f64 } else { 0.5 / (1.0 + (i + j) as f64) }));
            if k + 1 < nb {
                lower.push(DMatrix::from_fn(m, m, |i, j| 0.3 * ((i + 2 * j + k) as f64).sin()));
            }
        }
        let bt = BlockTridiag { diag, lower };
        let mut dense = DMatrix::zeros(m * nb, m * nb);
        for k in 0..nb {
            dense.view_mut((k * m, k * m), (m, m)).copy_from(&bt.diag[k]);
            if k + 1 < nb {
                dense.view_mut(((k + 1) * m, k * m), (m, m)).copy_from(&bt.lower[k]);
                dense.view_mut((k * m, (k + 1) * m), (m, m)).copy_from(&bt.lower[k].transpose());
            }
        }
        let b: Vec<DVector<f64>> = (0..nb).map(|k| DVector::from_fn(m, |i, _| (i + k) as f64 - 1.0)).collect();
        let x = bt.factor().unwrap().solve(&b);
        let flat = DVector::from_iterator(m * nb, b.iter().flat_map(|v| v.iter().copied()));
        let xd = dense.cholesky().unwrap().solve(&flat);
        for k in 0..nb {
            for i in 0..m {
                assert!((x[k][i] - xd[k * m + i]).abs() < 1e-12);
            }
        }
        let r = bt.mul(&x);
        for k in 0..nb {
            assert!((&r[k] - &b[k]).amax() < 1e-12);
        }
    }

    #[test]
    fn euler_steps_reuse_factors() {
        let ops = assemble_p1(&SpatialGrid::new(8).unwrap()).unwrap();
        let g = TimeGrid::from_points(vec![0.0, 0.25, 0.5, 0.625, 0.75, 1.0]).unwrap();
        let st = EulerSteps::new(&ops, 1.0, &g).unwrap();
        assert_eq!(st.distinct(), 2);
        let rhs = DVector::from_element(7, 1.0);
        let x = st.solve(3, &rhs);
        let b = &ops.mass + &ops.stiffness * 0.125;
        assert!((b * x - rhs).amax() < 1e-13);
    }
}
