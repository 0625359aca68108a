use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which of the two data integral equations drives the reconstruction.
///
/// The F route inverts `int_0^b u_1(t;k)^{n+1} q_{n-1}(t) dt = F_n(k)`; the
/// E route inverts `int_0^b v_1(t;k) u_1(t;k)^n q_{n-1}(t) dt = E_n(k)`,
/// which needs no `A_n` data. Each kernel behaves like `e^{-ik nu t}` with
/// `nu = n + 1` (F) or `nu = n - 1` (E), and the contour spacing and
/// exponential weight follow that envelope so the operator reduces to the
/// Fourier-series operator when `q0` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataRoute {
    FData,
    EData,
}

impl DataRoute {
    pub fn envelope_factor(&self, n: usize) -> usize {
        match self {
            DataRoute::FData => n + 1,
            DataRoute::EData => n - 1,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DataRoute::FData => "F",
            DataRoute::EData => "E",
        }
    }
}

/// Sample points `k_m = 2 pi m / (nu b) + i xi` for `m = -M .. M` on a line
/// shifted into the upper half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub xi: f64,
    pub n: usize,
    pub b: f64,
    pub m_max: usize,
    pub route: DataRoute,
}

impl ContourGrid {
    pub fn new(xi: f64, n: usize, b: f64, m_max: usize, route: DataRoute) -> Result<Self> {
        if !(xi.is_finite() && xi > 0.0) {
            return Err(Error::NonPositiveXi { xi });
        }
        if n < 2 {
            return Err(Error::contract(
                "ContourGrid::new",
                format!("recursion order n = {n} must be >= 2"),
            ));
        }
        Ok(Self {
            xi,
            n,
            b,
            m_max,
            route,
        })
    }

    pub fn envelope_factor(&self) -> usize {
        self.route.envelope_factor(self.n)
    }

    pub fn k_value(&self, m: i64) -> Complex64 {
        let nu = self.envelope_factor() as f64;
        Complex64::new(
            2.0 * std::f64::consts::PI * m as f64 / (nu * self.b),
            self.xi,
        )
    }

    pub fn mode_count(&self) -> usize {
        2 * self.m_max + 1
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let m = self.m_max as i64;
        -m..=m
    }
}

/// Norm bound for the perturbation of the Fourier operator with contour
/// envelope `nu`:
/// `s = M^2 b (nu b / 2 xi) coth(nu b xi / 2)` with
/// `M = (n+1) L exp(b (n+1) L)` and `L = int_0^b |q0|`.
pub fn s_bound(xi: f64, n: usize, b: f64, q0_l1: f64, nu: usize) -> Result<f64> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::NonPositiveXi { xi });
    }
    let np1 = (n + 1) as f64;
    let nu = nu as f64;
    let amplitude = np1 * q0_l1 * (b * np1 * q0_l1).exp();
    let arg = nu * b * xi / 2.0;
    Ok(amplitude * amplitude * b * (nu * b / (2.0 * xi)) * coth(arg))
}

/// The operator-perturbation bound for the F route:
/// `s(xi) = (b^2 (n+1)^3 / 2 xi) (int |q0|)^2 coth((n+1) b xi / 2)
///          exp(2 b (n+1) int |q0|)`.
pub fn s_of_xi(xi: f64, n: usize, b: f64, q0_l1: f64) -> Result<f64> {
    s_bound(xi, n, b, q0_l1, n + 1)
}

fn coth(x: f64) -> f64 {
    // accurate for small arguments where tanh underflows relative accuracy
    if x.abs() < 1e-8 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// Threshold `xi_0` solving `s(xi_0) = b`; the perturbed operator is
/// invertible by Neumann series for any `xi > xi_0`. Returns 0 when the
/// linear coefficient vanishes (any positive `xi` works).
pub fn find_xi0_for_route(n: usize, b: f64, q0_l1: f64, nu: usize) -> f64 {
    if q0_l1 <= 0.0 {
        return 0.0;
    }
    let s = |xi: f64| s_bound(xi, n, b, q0_l1, nu).expect("positive xi");
    let mut lo = 1e-6;
    while s(lo) < b {
        lo /= 4.0;
        if lo < 1e-300 {
            return 0.0;
        }
    }
    let mut hi = lo.max(1.0);
    while s(hi) > b {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let value = s(mid);
        if (value - b).abs() <= 1e-12 * b {
            break;
        }
        if value > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// F-route threshold (the reconstruction default).
pub fn find_xi0(n: usize, b: f64, q0_l1: f64) -> f64 {
    find_xi0_for_route(n, b, q0_l1, n + 1)
}
