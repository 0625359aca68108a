//! Forward and inverse scattering for the one-dimensional equation
//! `-u'' + Q(x, u) u = k^2 u` with an amplitude-dependent potential
//! `Q(x, u) = sum_n q_n(x) u^n` supported on `[0, b]`.
//!
//! The crate synthesizes scattering coefficients `A(k; eps)`, `B(k; eps)` by
//! direct numerical solution, expands them in powers of the incident
//! amplitude, and recovers the potential coefficients `q_1, q_2, ...`
//! recursively by inverting a perturbed Fourier-series operator on a shifted
//! contour in the complex k-plane.

// index loops over multiple same-length arrays read better than zip chains
// in the matrix and grid kernels
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod forward;
pub mod hierarchy;
pub mod inversion;
pub mod numerics;
pub mod potential;

pub use error::{Error, Result};
