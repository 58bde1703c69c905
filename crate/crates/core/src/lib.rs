//! Residual-based snapshot location for POD model order reduction of
//! distributed optimal control of the 1D heat equation.
//!
//! The time grid for the snapshots is produced by an a-posteriori estimator of a
//! space-time elliptic reformulation of the optimality system. A POD basis built on
//! that grid then drives a reduced gradient method for the optimal control.

pub mod check;
pub mod error;
pub mod fem1d;
pub mod grid;
pub mod linalg;
pub mod optctrl;
pub mod parabolic;
pub mod pipeline;
pub mod pod;
pub mod problem;
pub mod spacetime;

pub use error::{Error, Result};
