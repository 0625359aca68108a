//! Shared complex-valued numerical kernels: fixed-step RK4 integration on
//! `[0, b]`, composite Simpson quadrature, and dense linear algebra.
//!
//! All operations are pure functions of their inputs and safe to call
//! concurrently.

mod grid;
mod linalg;
mod ode;
mod quad;

pub use grid::{ComplexTrajectory, SpatialGrid};
pub use linalg::{
    condition_estimate, solve_dense, vector_norm, vector_sup_norm, ComplexMatrix, DenseSolution,
};
pub use ode::{integrate_ivp, integrate_system, Direction};
pub use quad::{cumquad, quad, quad_real, quad_weights};
