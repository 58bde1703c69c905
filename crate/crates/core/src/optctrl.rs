//! Adjoint-based steepest descent with exact line search for the
//! linear-quadratic heat control problem, full order and POD-reduced.
//!
//! The control is discretized through the optimality relation u = -p/alpha.
//! With implicit Euler for the state (load at the new level) and for the adjoint
//! (load at the old level), alpha*u + p is the exact gradient of
//!
//!   J(u) = 1/2 sum_{k<n} dt_{k+1} r_k' M B_{k+1}^{-1} M r_k + alpha/2 <u, u>,
//!   <a, b> = sum_{m>=1} dt_m a_m' M B_m^{-1} M b_m,  B_j = M + dt_j nu A,
//!
//! with r = y - y_d, and the descent method works in that pairing.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Result};
use crate::fem1d::{spacetime_l2_norm, MassStiffness, P1Ops, Trajectory};
use crate::grid::TimeGrid;
use crate::linalg::EulerSteps;
use crate::parabolic::{adjoint_sweep, heat_sweep};
use crate::pod::{reduce_operators, PodBasis, ReducedOperators};

/// Control problem on a fixed time grid.
#[derive(Debug, Clone)]
pub struct Ocp<O: MassStiffness> {
    pub ops: O,
    pub grid: TimeGrid,
    pub nu: f64,
    pub alpha: f64,
    pub y0: DVector<f64>,
    pub f: Trajectory,
    pub y_d: Trajectory,
    steps: EulerSteps,
}

/// Full-order problem in the P1 space.
pub type OcpProblem = Ocp<P1Ops>;

/// Iterates and diagnostics of the gradient method.
#[derive(Debug, Clone)]
pub struct OcpSolution {
    pub u: Trajectory,
    pub y: Trajectory,
    pub p: Trajectory,
    /// Trapezoid cost of the final iterate.
    pub cost: f64,
    /// Discrete objective per iterate, starting with u = 0.
    pub objective_history: Vec<f64>,
    /// Gradient norm per iterate.
    pub gradient_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of forward and backward PDE sweeps performed.
    pub sweeps: usize,
}

impl OcpSolution {
    pub fn gradient_norm(&self) -> f64 {
        *self.gradient_history.last().unwrap_or(&f64::NAN)
    }

    pub fn write_history_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,objective,gradient_norm")?;
        for (k, (j, g)) in self.objective_history.iter().zip(&self.gradient_history).enumerate() {
            writeln!(out, "{k},{j:e},{g:e}")?;
        }
        Ok(())
    }
}

impl<O: MassStiffness> Ocp<O> {
    pub fn new(
        ops: O,
        grid: TimeGrid,
        nu: f64,
        alpha: f64,
        y0: DVector<f64>,
        f: Trajectory,
        y_d: Trajectory,
    ) -> Result<Self> {
        if !(alpha > 0.0 && nu > 0.0) {
            return invalid("alpha and nu must be positive");
        }
        let n = ops.dim();
        if y0.len() != n || f.dim() != n || y_d.dim() != n {
            return invalid("problem data do not match the operator dimension");
        }
        if f.grid != grid || y_d.grid != grid {
            return invalid("problem data are not sampled on the problem time grid");
        }
        let steps = EulerSteps::new(&ops, nu, &grid)?;
        Ok(Self { ops, grid, nu, alpha, y0, f, y_d, steps })
    }

    pub fn zero_control(&self) -> Trajectory {
        Trajectory::zeros(&self.grid, self.ops.dim())
    }

    pub fn state(&self, u: &Trajectory) -> Result<Trajectory> {
        Ok(heat_sweep(&self.ops, &self.steps, &self.f.axpy(1.0, u)?, &self.y0))
    }

    pub fn adjoint(&self, y: &Trajectory) -> Result<Trajectory> {
        Ok(adjoint_sweep(&self.ops, &self.steps, &y.sub(&self.y_d)?))
    }

    /// <a, b> = sum_{m>=1} dt_m a_m' M B_m^{-1} M b_m.
    pub fn pairing(&self, a: &Trajectory, b: &Trajectory) -> f64 {
        let m = self.ops.mass();
        (1..=self.grid.n_intervals())
            .map(|j| self.grid.dt(j) * (m * &a.values[j]).dot(&self.steps.solve(j, &(m * &b.values[j]))))
            .sum()
    }

    /// Discrete objective whose gradient in the pairing is alpha*u + p.
    pub fn objective(&self, u: &Trajectory) -> Result<f64> {
        let y = self.state(u)?;
        let r = y.sub(&self.y_d)?;
        let m = self.ops.mass();
        let track: f64 = (1..=self.grid.n_intervals())
            .map(|j| {
                let mr = m * &r.values[j - 1];
                self.grid.dt(j) * mr.dot(&self.steps.solve(j, &mr))
            })
            .sum();
        Ok(0.5 * track + 0.5 * self.alpha * self.pairing(u, u))
    }

    /// Gradient alpha*u + p(y(u)).
    pub fn gradient(&self, u: &Trajectory) -> Result<Trajectory> {
        let p = self.adjoint(&self.state(u)?)?;
        u.scale(self.alpha).axpy(1.0, &p)
    }

    /// Trapezoid cost of a state-control pair.
    pub fn cost(&self, y: &Trajectory, u: &Trajectory) -> Result<f64> {
        eval_cost(y, u, &self.y_d, self.alpha, self.ops.mass())
    }

    /// Hessian action on a direction: alpha*d + p of the homogeneous problem.
    fn hessian(&self, d: &Trajectory) -> Result<Trajectory> {
        let z = DVector::zeros(self.ops.dim());
        let yd = heat_sweep(&self.ops, &self.steps, d, &z);
        let pd = adjoint_sweep(&self.ops, &self.steps, &yd);
        d.scale(self.alpha).axpy(1.0, &pd)
    }
}

/// J(y,u) = 1/2 |y - y_d|^2 + alpha/2 |u|^2 in the trapezoid space-time norm.
pub fn eval_cost(y: &Trajectory, u: &Trajectory, y_d: &Trajectory, alpha: f64, mass: &DMatrix<f64>) -> Result<f64> {
    y.check_compatible(u)?;
    let e = spacetime_l2_norm(&y.sub(y_d)?, mass)?;
    let c = spacetime_l2_norm(u, mass)?;
    Ok(0.5 * e * e + 0.5 * alpha * c * c)
}

/// Steepest descent from u = 0 until the gradient norm drops below `tol`.
pub fn solve_ocp<O: MassStiffness>(prob: &Ocp<O>, tol: f64, max_iter: usize) -> Result<OcpSolution> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let alpha = prob.alpha;
    let mass = prob.ops.mass();
    let mut u = prob.zero_control();
    let mut objective_history = Vec::new();
    let mut gradient_history = Vec::new();
    let mut sweeps = 0;
    let mut iterations = 0;
    loop {
        let y = prob.state(&u)?;
        let p = prob.adjoint(&y)?;
        sweeps += 2;
        // u_0 does not act on the state; fix it by the optimality relation
        u.values[0] = &p.values[0] * (-1.0 / alpha);
        let g = u.scale(alpha).axpy(1.0, &p)?;
        let gnorm = spacetime_l2_norm(&g, mass)?;
        objective_history.push(prob.objective(&u)?);
        gradient_history.push(gnorm);
        let converged = gnorm <= tol;
        if converged || iterations == max_iter {
            let cost = prob.cost(&y, &u)?;
            return Ok(OcpSolution {
                u,
                y,
                p,
                cost,
                objective_history,
                gradient_history,
                iterations,
                converged,
                sweeps,
            });
        }
        let hg = prob.hessian(&g)?;
        sweeps += 2;
        let sigma = prob.pairing(&g, &g) / prob.pairing(&hg, &g);
        u = u.axpy(-sigma, &g)?;
        iterations += 1;
    }
}

/// Reduced solve with the trajectories lifted back to the P1 space.
#[derive(Debug, Clone)]
pub struct ReducedSolution {
    /// Solution in POD coordinates.
    pub reduced: OcpSolution,
    pub y: Trajectory,
    pub u: Trajectory,
    pub p: Trajectory,
    pub operators: ReducedOperators,
}

/// Reduced problem: Galerkin projection onto the basis, data in POD coordinates.
pub fn reduced_problem(prob: &OcpProblem, basis: &PodBasis) -> Result<(Ocp<ReducedOperators>, ReducedOperators)> {
    let red = reduce_operators(&prob.ops, basis, &prob.y0, &prob.y_d)?;
    let chol = red
        .mass
        .clone()
        .cholesky()
        .ok_or(crate::error::Error::NotPositiveDefinite("reduced mass"))?;
    let coords = |t: &Trajectory| t.map(|w| chol.solve(w));
    let w0 = chol.solve(&red.w0);
    let f = coords(&red.project_load(&prob.f));
    let y_d = coords(&red.w_d);
    let ocp = Ocp::new(red.clone(), prob.grid.clone(), prob.nu, prob.alpha, w0, f, y_d)?;
    Ok((ocp, red))
}

pub fn solve_reduced_ocp(prob: &OcpProblem, basis: &PodBasis, tol: f64, max_iter: usize) -> Result<ReducedSolution> {
    let (ocp, operators) = reduced_problem(prob, basis)?;
    let reduced = solve_ocp(&ocp, tol, max_iter)?;
    Ok(ReducedSolution {
        y: operators.lift(&reduced.y),
        u: operators.lift(&reduced.u),
        p: operators.lift(&reduced.p),
        reduced,
        operators,
    })
}
