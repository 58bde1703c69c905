//! Manufactured test problem with an interior layer at t = 1/2.
//!
//! y(x,t) = sin(pi x) atan((t - 1/2)/eps), p(x,t) = sin(pi x) sin(pi t), u = -p/alpha,
//! with f and y_d chosen so that (y, u, p) solves the optimality system on [0,1].

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::fem1d::Jet;
use crate::spacetime::SpaceTimeData;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub eps: f64,
    pub alpha: f64,
    pub nu: f64,
}

pub fn manufactured(eps: f64, alpha: f64, nu: f64) -> Result<Manufactured> {
    if !(eps > 0.0) {
        return invalid(format!("layer width must be positive, got {eps}"));
    }
    if !(alpha > 0.0 && nu > 0.0) {
        return invalid("alpha and nu must be positive");
    }
    Ok(Manufactured { eps, alpha, nu })
}

impl Manufactured {
    fn layer(&self, t: f64) -> f64 {
        ((t - 0.5) / self.eps).atan()
    }

    fn layer_dt(&self, t: f64) -> f64 {
        let s = t - 0.5;
        self.eps / (self.eps * self.eps + s * s)
    }

    fn layer_dtt(&self, t: f64) -> f64 {
        let s = t - 0.5;
        let d = self.eps * self.eps + s * s;
        -2.0 * self.eps * s / (d * d)
    }

    /// Time factor of f.
    pub fn f_time(&self, t: f64) -> f64 {
        self.layer_dt(t) + self.nu * PI * PI * self.layer(t) + (PI * t).sin() / self.alpha
    }

    fn f_time_dt(&self, t: f64) -> f64 {
        self.layer_dtt(t) + self.nu * PI * PI * self.layer_dt(t) + PI * (PI * t).cos() / self.alpha
    }

    /// Time factor of y_d.
    pub fn yd_time(&self, t: f64) -> f64 {
        self.layer(t) + PI * (PI * t).cos() - self.nu * PI * PI * (PI * t).sin()
    }

    pub fn y_exact(&self, x: f64, t: f64) -> f64 {
        (PI * x).sin() * self.layer(t)
    }

    pub fn p_exact(&self, x: f64, t: f64) -> f64 {
        (PI * x).sin() * (PI * t).sin()
    }

    pub fn u_exact(&self, x: f64, t: f64) -> f64 {
        -self.p_exact(x, t) / self.alpha
    }

    pub fn f(&self, x: f64, t: f64) -> f64 {
        (PI * x).sin() * self.f_time(t)
    }

    pub fn y_d(&self, x: f64, t: f64) -> f64 {
        (PI * x).sin() * self.yd_time(t)
    }

    pub fn y0(&self, x: f64) -> f64 {
        self.y_exact(x, 0.0)
    }

    /// Residual of y_t - nu y_xx - f - u at (x,t) from the closed forms.
    pub fn state_residual(&self, x: f64, t: f64) -> f64 {
        let s = (PI * x).sin();
        let y_t = s * self.layer_dt(t);
        let y_xx = -PI * PI * self.y_exact(x, t);
        y_t - self.nu * y_xx - self.f(x, t) - self.u_exact(x, t)
    }

    /// Residual of -p_t - nu p_xx - (y - y_d) at (x,t).
    pub fn adjoint_residual(&self, x: f64, t: f64) -> f64 {
        let s = (PI * x).sin();
        let p_t = s * PI * (PI * t).cos();
        let p_xx = -PI * PI * self.p_exact(x, t);
        -p_t - self.nu * p_xx - (self.y_exact(x, t) - self.y_d(x, t))
    }

    /// Data of the space-time reformulation on [0, t_final].
    pub fn spacetime_data(&self, include_f: bool, t_final: f64) -> ManufacturedSpaceTime {
        ManufacturedSpaceTime { problem: *self, include_f, t_final }
    }
}

/// Space-time view of the manufactured problem.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSpaceTime {
    pub problem: Manufactured,
    pub include_f: bool,
    pub t_final: f64,
}

fn sine_jet(x: f64, c: f64) -> Jet {
    Jet::new(c * (PI * x).sin(), c * PI * (PI * x).cos())
}

impl SpaceTimeData for ManufacturedSpaceTime {
    fn source(&self, x: f64, t: f64) -> Jet {
        let p = &self.problem;
        let mut c = p.yd_time(t) / p.alpha;
        if self.include_f {
            // - f_t - nu f_xx
            c += -p.f_time_dt(t) + p.nu * PI * PI * p.f_time(t);
        }
        sine_jet(x, c)
    }

    fn terminal(&self, x: f64) -> Jet {
        if self.include_f {
            sine_jet(x, self.problem.f_time(self.t_final))
        } else {
            Jet::default()
        }
    }

    fn initial(&self, x: f64) -> Jet {
        sine_jet(x, self.problem.layer(0.0))
    }

    fn boundary(&self, t: f64) -> [f64; 2] {
        if self.include_f {
            [self.problem.f(0.0, t), self.problem.f(1.0, t)]
        } else {
            [0.0, 0.0]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_eps() {
        assert!(manufactured(0.0, 1.0, 1.0).is_err());
        assert!(manufactured(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn initial_value_at_small_eps() {
        let m = manufactured(1e-3, 1.0, 1.0).unwrap();
        assert!((m.y0(0.5) - (-500.0f64).atan()).abs() < 1e-15);
        assert!((m.y0(0.5) + 1.5688).abs() < 1e-4);
    }

    #[test]
    fn closed_forms_solve_optimality_system() {
        for (eps, alpha, nu) in [(1e-3, 1.0, 1.0), (0.1, 2.0, 0.5)] {
            let m = manufactured(eps, alpha, nu).unwrap();
            for i in 0..50 {
                for k in 0..50 {
                    let (x, t) = (i as f64 / 49.0, k as f64 / 49.0);
                    assert!(m.state_residual(x, t).abs() <= 1e-12);
                    assert!(m.adjoint_residual(x, t).abs() <= 1e-12);
                }
            }
            assert!(m.p_exact(0.3, 1.0).abs() < 1e-15);
        }
    }
}
