use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hierarchy::{forcing, linear_scattering};
use crate::inversion::contour::{s_bound, ContourGrid, DataRoute};
use crate::inversion::data::DataSetDn;
use crate::numerics::{quad, quad_weights, ComplexMatrix, SpatialGrid};

/// Discretization of the reconstruction interval.
///
/// The closed grid carries `panels + 1` nodes including both endpoints with
/// composite Simpson weights. The periodic grid drops the right endpoint and
/// uses the equal-weight rule, which is exactly orthogonal on Fourier modes
/// and makes a square system (`count = 2M + 1`) invertible; that regime is
/// where the series solver and the least-squares solver agree to rounding.
#[derive(Debug, Clone, PartialEq)]
pub enum InversionGrid {
    ClosedSimpson(SpatialGrid),
    PeriodicUniform { b: f64, count: usize },
}

impl InversionGrid {
    pub fn closed(b: f64, panels: usize) -> Result<Self> {
        Ok(Self::ClosedSimpson(SpatialGrid::new(b, panels)?))
    }

    pub fn periodic(b: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid {
                reason: format!("periodic grid needs at least 2 nodes, got {count}"),
            });
        }
        Ok(Self::PeriodicUniform { b, count })
    }

    pub fn width(&self) -> f64 {
        match self {
            Self::ClosedSimpson(g) => g.width(),
            Self::PeriodicUniform { b, .. } => *b,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::ClosedSimpson(g) => g.len(),
            Self::PeriodicUniform { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> Vec<f64> {
        match self {
            Self::ClosedSimpson(g) => g.nodes().collect(),
            Self::PeriodicUniform { b, count } => {
                (0..*count).map(|j| j as f64 * b / *count as f64).collect()
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        match self {
            Self::ClosedSimpson(g) => quad_weights(g),
            Self::PeriodicUniform { b, count } => vec![b / *count as f64; *count],
        }
    }

    /// Fine ODE grid whose every `factor`-th node is an inversion node.
    fn refined_ode_grid(&self, factor: usize) -> Result<(SpatialGrid, usize)> {
        match self {
            Self::ClosedSimpson(g) => {
                let factor = factor.max(1);
                Ok((g.refined(factor)?, factor))
            }
            Self::PeriodicUniform { b, count } => {
                let mut factor = factor.max(2);
                if !(count * factor).is_multiple_of(2) {
                    factor += 1;
                }
                Ok((SpatialGrid::new(*b, count * factor)?, factor))
            }
        }
    }
}

/// Assembly options for one reconstruction system.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    /// Contour modes `m = -m_max .. m_max`.
    pub m_max: usize,
    pub grid: InversionGrid,
    pub route: DataRoute,
    /// Skip the (power-iteration) operator-norm diagnostics when false.
    pub compute_norms: bool,
}

impl SystemConfig {
    pub fn new(m_max: usize, grid: InversionGrid, route: DataRoute) -> Self {
        Self {
            m_max,
            grid,
            route,
            compute_norms: true,
        }
    }
}

/// Quantities reported alongside the assembled system.
#[derive(Debug, Clone)]
pub struct SystemDiagnostics {
    /// Theoretical perturbation bound `s(xi)` for the chosen route.
    pub s_xi: f64,
    /// `sqrt(s(xi) / b)`, the Neumann contraction estimate.
    pub contraction_estimate: f64,
    /// Largest observed `|U(t; k_m)|` where
    /// `kernel = e^{-2 pi i m t / b} [1 + U / k_m]`.
    pub u_bound_empirical: f64,
    /// Discrete spectral norms (zero when norm diagnostics are disabled).
    pub k0_norm: f64,
    pub k0_inv_norm: f64,
    pub k_minus_k0_norm: f64,
    /// Smallest `|B_1(k_m)|` met on the contour.
    pub min_b1: f64,
}

/// Discrete form of the data equation `K phi = p` on the shifted contour:
/// `kernel[m][j]` samples the unweighted kernel at inversion node `t_j`,
/// `weights` are the quadrature weights, and `rhs[m]` is the data functional
/// at `k_m`.
#[derive(Debug, Clone)]
pub struct InversionSystem {
    pub contour: ContourGrid,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kernel: ComplexMatrix,
    pub rhs: Vec<Complex64>,
    pub diagnostics: SystemDiagnostics,
}

impl InversionSystem {
    pub fn mode_count(&self) -> usize {
        self.contour.mode_count()
    }

    /// `(K phi)(m) = sum_j w_j kernel[m][j] phi_j`.
    pub fn apply_kernel(&self, phi: &[Complex64]) -> Vec<Complex64> {
        (0..self.mode_count())
            .map(|row| {
                self.kernel
                    .row(row)
                    .iter()
                    .zip(phi)
                    .zip(&self.weights)
                    .map(|((k, p), w)| k * p * *w)
                    .sum()
            })
            .collect()
    }

    /// Reference Fourier rows `K_0(m, t) = e^{-2 pi i m t / b}`.
    pub fn k0_row(&self, row: usize) -> Vec<Complex64> {
        let m = row as i64 - self.contour.m_max as i64;
        let b = self.contour.b;
        self.nodes
            .iter()
            .map(|&t| Complex64::new(0.0, -2.0 * std::f64::consts::PI * m as f64 * t / b).exp())
            .collect()
    }

    pub fn apply_k0(&self, phi: &[Complex64]) -> Vec<Complex64> {
        (0..self.mode_count())
            .map(|row| {
                self.k0_row(row)
                    .iter()
                    .zip(phi)
                    .zip(&self.weights)
                    .map(|((k, p), w)| k * p * *w)
                    .sum()
            })
            .collect()
    }

    /// Truncated Fourier synthesis
    /// `(K_0^{-1} h)(t_j) = (1/b) sum_m h[m] e^{2 pi i m t_j / b}`.
    pub fn k0_synthesis(&self, h: &[Complex64]) -> Vec<Complex64> {
        let b = self.contour.b;
        let m_max = self.contour.m_max as i64;
        self.nodes
            .iter()
            .map(|&t| {
                let mut sum = Complex64::new(0.0, 0.0);
                for (row, value) in h.iter().enumerate() {
                    let m = row as i64 - m_max;
                    let phase =
                        Complex64::new(0.0, 2.0 * std::f64::consts::PI * m as f64 * t / b).exp();
                    sum += value * phase;
                }
                sum / b
            })
            .collect()
    }

    /// Quadrature-weighted L2 norm of a grid function.
    pub fn weighted_norm(&self, phi: &[Complex64]) -> f64 {
        phi.iter()
            .zip(&self.weights)
            .map(|(p, w)| p.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Kernel matrix with quadrature weights folded in, mapping node values
    /// to mode data.
    pub fn weighted_matrix(&self) -> ComplexMatrix {
        let rows = self.mode_count();
        let cols = self.nodes.len();
        let mut out = ComplexMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, self.kernel.get(r, c) * self.weights[c]);
            }
        }
        out
    }
}

/// Builds the discrete system for recovering `q_{n-1}` from the data set.
///
/// Every contour mode is assembled independently: the Jost pair of the known
/// `q0` at `k_m` supplies the kernel row and the `A_1/B_1` factors, the
/// known-coefficient cascade supplies `h_n`, and the data source supplies
/// `(A_n, B_n)`.
pub fn build_system(d: &DataSetDn, xi: f64, cfg: &SystemConfig) -> Result<InversionSystem> {
    let contour = ContourGrid::new(xi, d.n, d.b, cfg.m_max, cfg.route)?;
    let nu = contour.envelope_factor();
    let q0 = d.q0();
    let q0_l1 = q0.l1_norm();
    let s_xi = s_bound(xi, d.n, d.b, q0_l1, nu)?;

    // Resolve the ODE grid: fine enough for the largest |k| on the contour
    // and never coarser than the default forward resolution.
    let k_max_abs = contour.k_value(cfg.m_max as i64).norm();
    let base_step = d.b / cfg.grid.len() as f64;
    let accuracy_factor = (k_max_abs * base_step / 0.05).ceil() as usize;
    let floor_factor = (2000.0 / cfg.grid.len() as f64).ceil() as usize;
    let (ode_grid, factor) = cfg
        .grid
        .refined_ode_grid(accuracy_factor.max(floor_factor).max(1))?;

    let nodes = cfg.grid.nodes();
    let weights = cfg.grid.weights();
    let n = d.n;

    struct RowOutput {
        kernel: Vec<Complex64>,
        rhs: Complex64,
        u_max: f64,
        b1_abs: f64,
    }

    let modes: Vec<i64> = contour.modes().collect();
    let rows: Result<Vec<RowOutput>> = modes
        .par_iter()
        .map(|&m| {
            let k = contour.k_value(m);
            let jost = linear_scattering(q0, k, &ode_grid)?;
            if jost.b1.norm() < 1e-10 {
                return Err(Error::ContourNearResonance {
                    mode: m,
                    magnitude: jost.b1.norm(),
                });
            }

            // h_n from the known coefficients (zero at n = 2)
            let h = if n > 2 {
                let potential = d.known_potential()?;
                let state = crate::hierarchy::solve_cascade(&potential, k, n - 1, &ode_grid)?;
                Some(forcing(&potential, &state, n)?.1)
            } else {
                None
            };

            let (k_an, k_bn) = d.data.eval_k_ab(n, k, &ode_grid)?;
            let i = Complex64::i();
            let rhs = match cfg.route {
                DataRoute::FData => {
                    let mut value = 2.0 * i * (jost.b1 * k_an - jost.a1 * k_bn);
                    if let Some(h) = &h {
                        let integrand: Vec<Complex64> = (0..ode_grid.len())
                            .map(|j| jost.u1.value(j) * h.value(j))
                            .collect();
                        value -= quad(&integrand, &ode_grid)?;
                    }
                    value
                }
                DataRoute::EData => {
                    let mut value = -2.0 * i * k_bn;
                    if let Some(h) = &h {
                        let integrand: Vec<Complex64> = (0..ode_grid.len())
                            .map(|j| jost.v1.value(j) * h.value(j))
                            .collect();
                        value -= quad(&integrand, &ode_grid)?;
                    }
                    value
                }
            };

            // kernel row on the inversion nodes (every `factor`-th ODE node)
            let mut kernel = Vec::with_capacity(nodes.len());
            let mut u_max: f64 = 0.0;
            for (j, &t) in nodes.iter().enumerate() {
                let fine = j * factor;
                let u1 = jost.u1.value(fine);
                let core = match cfg.route {
                    DataRoute::FData => u1.powu((n + 1) as u32),
                    DataRoute::EData => jost.v1.value(fine) * u1.powu(n as u32),
                };
                let value = core * (-xi * nu as f64 * t).exp();
                kernel.push(value);
                // kernel = e^{-2 pi i m t / b} [1 + U / k]
                let phase =
                    Complex64::new(0.0, 2.0 * std::f64::consts::PI * m as f64 * t / d.b).exp();
                let u = k * (value * phase - 1.0);
                u_max = u_max.max(u.norm());
            }

            Ok(RowOutput {
                kernel,
                rhs,
                u_max,
                b1_abs: jost.b1.norm(),
            })
        })
        .collect();
    let rows = rows?;

    let kernel = ComplexMatrix::from_rows(rows.iter().map(|r| r.kernel.clone()).collect())?;
    let rhs: Vec<Complex64> = rows.iter().map(|r| r.rhs).collect();
    let u_bound_empirical = rows.iter().map(|r| r.u_max).fold(0.0, f64::max);
    let min_b1 = rows.iter().map(|r| r.b1_abs).fold(f64::INFINITY, f64::min);

    let mut diagnostics = SystemDiagnostics {
        s_xi,
        contraction_estimate: (s_xi / d.b).sqrt(),
        u_bound_empirical,
        k0_norm: 0.0,
        k0_inv_norm: 0.0,
        k_minus_k0_norm: 0.0,
        min_b1,
    };

    let system = InversionSystem {
        contour,
        nodes,
        weights,
        kernel,
        rhs,
        diagnostics: diagnostics.clone(),
    };

    if cfg.compute_norms {
        let (k0_norm, k0_inv_norm, diff_norm) = discrete_norms(&system);
        diagnostics.k0_norm = k0_norm;
        diagnostics.k0_inv_norm = k0_inv_norm;
        diagnostics.k_minus_k0_norm = diff_norm;
        return Ok(InversionSystem {
            diagnostics,
            ..system
        });
    }
    Ok(system)
}

/// Discrete spectral norms of `K_0`, its synthesis inverse, and `K - K_0`,
/// measured between the weighted L2 space on the nodes and the mode space:
/// matrix entries are scaled by `sqrt(w_j)` so Euclidean norms match the
/// quadrature inner product.
fn discrete_norms(sys: &InversionSystem) -> (f64, f64, f64) {
    let rows = sys.mode_count();
    let cols = sys.nodes.len();
    let sqrt_w: Vec<f64> = sys.weights.iter().map(|w| w.sqrt()).collect();

    let mut k0 = ComplexMatrix::zeros(rows, cols);
    let mut diff = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        let k0_row = sys.k0_row(r);
        for c in 0..cols {
            k0.set(r, c, k0_row[c] * sqrt_w[c]);
            diff.set(r, c, (sys.kernel.get(r, c) - k0_row[c]) * sqrt_w[c]);
        }
    }

    // synthesis: node output scaled by sqrt(w_j), mode input unweighted
    let b = sys.contour.b;
    let m_max = sys.contour.m_max as i64;
    let mut synthesis = ComplexMatrix::zeros(cols, rows);
    for (j, &t) in sys.nodes.iter().enumerate() {
        for row in 0..rows {
            let m = row as i64 - m_max;
            let phase = Complex64::new(0.0, 2.0 * std::f64::consts::PI * m as f64 * t / b).exp();
            synthesis.set(j, row, phase * (sqrt_w[j] / b));
        }
    }

    (
        k0.spectral_norm(),
        synthesis.spectral_norm(),
        diff.spectral_norm(),
    )
}
