//! POD by the method of snapshots with a weighted inner product.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::fem1d::{MassStiffness, P1Ops, Trajectory};

/// W-orthonormal POD modes with the full snapshot spectrum.
#[derive(Debug, Clone)]
pub struct PodBasis {
    /// Modes as columns, N x l.
    pub modes: DMatrix<f64>,
    /// Eigenvalues of the weighted Gramian, descending, negatives clamped to 0.
    pub eigenvalues: Vec<f64>,
    /// Numerical rank of the snapshot set.
    pub numerical_rank: usize,
    /// Rank asked for; exceeds `rank()` when the snapshot set is rank deficient.
    pub requested: usize,
    /// Inner-product matrix.
    pub weight: DMatrix<f64>,
}

impl PodBasis {
    pub fn rank(&self) -> usize {
        self.modes.ncols()
    }

    pub fn truncated(&self) -> bool {
        self.requested > self.rank()
    }

    /// Fraction of the snapshot energy captured by the retained modes.
    pub fn energy_ratio(&self) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        self.eigenvalues[..self.rank()].iter().sum::<f64>() / total
    }

    /// Basis restricted to its first `l` modes (`l = 0` gives the empty basis).
    pub fn leading(&self, l: usize) -> PodBasis {
        let l = l.min(self.rank());
        PodBasis {
            modes: self.modes.columns(0, l).into_owned(),
            requested: l,
            ..self.clone()
        }
    }

    pub fn write_spectrum_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let total: f64 = self.eigenvalues.iter().sum();
        writeln!(out, "index,lambda,cumulative_energy")?;
        let mut acc = 0.0;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            acc += l;
            writeln!(out, "{},{:e},{:e}", i + 1, l, acc / total)?;
        }
        Ok(())
    }
}

/// Method of snapshots on K_jk = sqrt(b_j b_k) y_j^T W y_k.
pub fn compute_pod(snapshots: &Trajectory, beta: &[f64], w: &DMatrix<f64>, rank: usize) -> Result<PodBasis> {
    let k = snapshots.len();
    let dim = snapshots.dim();
    if beta.len() != k {
        return invalid(format!("{} weights for {} snapshots", beta.len(), k));
    }
    if w.nrows() != dim || w.ncols() != dim {
        return invalid("weight matrix does not match snapshot dimension");
    }
    if rank == 0 {
        return invalid("POD rank must be at least 1");
    }
    let sb: Vec<f64> = beta.iter().map(|b| b.sqrt()).collect();
    let wy: Vec<DVector<f64>> = snapshots.values.iter().map(|y| w * y).collect();
    let mut gram = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..=a {
            let v = sb[a] * sb[b] * snapshots.values[a].dot(&wy[b]);
            gram[(a, b)] = v;
            gram[(b, a)] = v;
        }
    }
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let lead = eigenvalues[0];
    if !(lead > 1e-300) {
        return Err(Error::EmptyBasis);
    }
    let tol = (1e-13 * lead).max(1e-300);
    let numerical_rank = eigenvalues.iter().take_while(|&&l| l > tol).count();
    let l = rank.min(numerical_rank);
    let mut modes = DMatrix::zeros(dim, l);
    for (c, &i) in order[..l].iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let mut psi = DVector::zeros(dim);
        for j in 0..k {
            psi += &snapshots.values[j] * (sb[j] * v[j]);
        }
        psi /= eigenvalues[c].sqrt();
        let cut = 1e-12 * psi.amax();
        if let Some(first) = psi.iter().find(|x| x.abs() > cut) {
            if *first < 0.0 {
                psi = -psi;
            }
        }
        modes.set_column(c, &psi);
    }
    Ok(PodBasis { modes, eigenvalues, numerical_rank, requested: rank, weight: w.clone() })
}

/// Sum_j b_j |y_j - P y_j|_W^2 with P the W-orthogonal projection onto the modes.
pub fn projection_error(snapshots: &Trajectory, beta: &[f64], w: &DMatrix<f64>, basis: &PodBasis) -> Result<f64> {
    if beta.len() != snapshots.len() || w.nrows() != snapshots.dim() || basis.modes.nrows() != snapshots.dim() {
        return invalid("snapshots, weights and basis are incompatible");
    }
    let psi = &basis.modes;
    let mut err = 0.0;
    for (y, b) in snapshots.values.iter().zip(beta) {
        let coeff = psi.tr_mul(&(w * y));
        let r = y - psi * coeff;
        err += b * r.dot(&(w * &r));
    }
    Ok(err)
}

/// Galerkin projection of the P1 model onto a POD basis.
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    pub modes: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Psi^T M y0.
    pub w0: DVector<f64>,
    /// Psi^T M y_d(t_j).
    pub w_d: Trajectory,
    full_mass: DMatrix<f64>,
}

impl MassStiffness for ReducedOperators {
    fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }
    fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }
}

impl ReducedOperators {
    /// Psi^T M v for every time point.
    pub fn project_load(&self, traj: &Trajectory) -> Trajectory {
        traj.map(|v| self.modes.tr_mul(&(&self.full_mass * v)))
    }

    /// Psi c for every time point.
    pub fn lift(&self, traj: &Trajectory) -> Trajectory {
        traj.map(|c| &self.modes * c)
    }
}

pub fn reduce_operators(ops: &P1Ops, basis: &PodBasis, y0: &DVector<f64>, y_d: &Trajectory) -> Result<ReducedOperators> {
    let n = ops.dim();
    if basis.modes.nrows() != n || y0.len() != n || y_d.dim() != n {
        return invalid("basis, initial value and desired state must match the P1 dimension");
    }
    let psi = &basis.modes;
    let mass = psi.tr_mul(&(&ops.mass * psi));
    let stiffness = psi.tr_mul(&(&ops.stiffness * psi));
    let w0 = psi.tr_mul(&(&ops.mass * y0));
    let w_d = y_d.map(|v| psi.tr_mul(&(&ops.mass * v)));
    Ok(ReducedOperators { modes: psi.clone(), mass, stiffness, w0, w_d, full_mass: ops.mass.clone() })
}
