use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion::contour::{find_xi0_for_route, DataRoute};
use crate::inversion::data::{DataSetDn, OrderData};
use crate::inversion::system::{build_system, InversionGrid, InversionSystem, SystemConfig};
use crate::numerics::{solve_dense, vector_norm, ComplexMatrix};
use crate::potential::CoefficientFunction;

/// Result of the Neumann-series application of `K^{-1}`.
#[derive(Debug, Clone)]
pub struct NeumannOutcome {
    pub phi: Vec<Complex64>,
    /// Series terms accumulated (1 when `K = K_0`).
    pub terms: usize,
    /// Largest observed successive-term norm ratio.
    pub term_ratio_max: f64,
    pub converged: bool,
}

/// Evaluates `K^{-1} p` as the alternating series
/// `sum_j (-1)^j [K_0^{-1} (K - K_0)]^j K_0^{-1} p`, with `K_0^{-1}` the
/// truncated Fourier synthesis. Convergence is guaranteed for
/// `sqrt(s(xi)/b) < 1`; set `force` to attempt the series anyway, in which
/// case divergence is detected and reported.
pub fn invert_neumann(
    sys: &InversionSystem,
    max_terms: usize,
    tol: f64,
    force: bool,
) -> Result<NeumannOutcome> {
    let estimate = sys.diagnostics.contraction_estimate;
    if estimate >= 1.0 && !force {
        return Err(Error::NeumannNotContractive { estimate });
    }

    let term = sys.k0_synthesis(&sys.rhs);
    let mut phi = term.clone();
    let mut current = term;
    let mut terms = 1usize;
    let mut prev_norm = sys.weighted_norm(&current);
    let base_norm = prev_norm.max(1e-300);
    let mut ratio_max: f64 = 0.0;
    let mut growth_streak = 0usize;

    for _ in 1..max_terms {
        let k_current = sys.apply_kernel(&current);
        let k0_current = sys.apply_k0(&current);
        let residual_modes: Vec<Complex64> = k_current
            .iter()
            .zip(&k0_current)
            .map(|(a, b)| a - b)
            .collect();
        let next: Vec<Complex64> = sys
            .k0_synthesis(&residual_modes)
            .into_iter()
            .map(|v| -v)
            .collect();
        let norm = sys.weighted_norm(&next);
        if prev_norm > 0.0 {
            ratio_max = ratio_max.max(norm / prev_norm);
        }
        if norm <= tol * base_norm {
            return Ok(NeumannOutcome {
                phi,
                terms,
                term_ratio_max: ratio_max,
                converged: true,
            });
        }
        if norm > prev_norm {
            growth_streak += 1;
            if growth_streak >= 3 && norm > 10.0 * base_norm {
                return Err(Error::NeumannDiverged {
                    terms,
                    term_norm: norm,
                });
            }
        } else {
            growth_streak = 0;
        }
        for (p, t) in phi.iter_mut().zip(&next) {
            *p += t;
        }
        current = next;
        prev_norm = norm;
        terms += 1;
    }
    Ok(NeumannOutcome {
        phi,
        terms,
        term_ratio_max: ratio_max,
        converged: false,
    })
}

/// Penalty used by the least-squares inverter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    /// `lambda ||phi||^2` in the quadrature-weighted L2 norm, with
    /// `lambda = 1e-10 ||K||^2`.
    Identity,
    /// `lambda ||D phi||^2` on first differences; fills data null directions
    /// with the smoothest completion instead of the smallest one, which
    /// suppresses periodization ringing for non-periodic coefficients.
    FirstDifference,
}

/// Outcome of the regularized least-squares solve.
#[derive(Debug, Clone)]
pub struct DirectOutcome {
    pub phi: Vec<Complex64>,
    /// `||K phi - p|| / ||p||` over the modes.
    pub relative_residual: f64,
}

/// Minimizes `||K phi - p||^2 + lambda R(phi)` over node values via the
/// normal equations; works for square, overdetermined, and underdetermined
/// mode counts.
pub fn invert_direct(sys: &InversionSystem, regularizer: Regularizer) -> Result<DirectOutcome> {
    let a = sys.weighted_matrix();
    let rows = a.rows();
    let cols = a.cols();
    let a_norm = a.spectral_norm();
    let lambda = 1e-10 * a_norm * a_norm;

    let mut normal = ComplexMatrix::zeros(cols, cols);
    for i in 0..cols {
        for j in 0..cols {
            let mut sum = Complex64::new(0.0, 0.0);
            for r in 0..rows {
                sum += a.get(r, i).conj() * a.get(r, j);
            }
            normal.set(i, j, sum);
        }
    }
    match regularizer {
        Regularizer::Identity => {
            let w_scale = sys.weights.iter().sum::<f64>() / cols as f64;
            for i in 0..cols {
                let v = normal.get(i, i) + lambda * sys.weights[i] / w_scale;
                normal.set(i, i, v);
            }
        }
        Regularizer::FirstDifference => {
            // lambda (D^T D) with D the plain difference stencil, plus a tiny
            // ridge to pin the constant direction
            let ridge = 1e-13 * a_norm * a_norm;
            for i in 0..cols {
                let mut diag = ridge;
                if i > 0 {
                    diag += lambda;
                }
                if i + 1 < cols {
                    diag += lambda;
                }
                let v = normal.get(i, i) + diag;
                normal.set(i, i, v);
                if i + 1 < cols {
                    let off = normal.get(i, i + 1) - lambda;
                    normal.set(i, i + 1, off);
                    let off = normal.get(i + 1, i) - lambda;
                    normal.set(i + 1, i, off);
                }
            }
        }
    }

    let rhs = a.adjoint_matvec(&sys.rhs);
    let solution = solve_dense(&normal, &rhs)?;
    let phi = solution.x;

    let k_phi = sys.apply_kernel(&phi);
    let residual: Vec<Complex64> = k_phi.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
    let p_norm = vector_norm(&sys.rhs).max(1e-300);
    Ok(DirectOutcome {
        phi,
        relative_residual: vector_norm(&residual) / p_norm,
    })
}

/// How `xi` is chosen for a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiChoice {
    /// `max(2 xi_0, 1/b)`, falling back to `1/b` when `q0` vanishes.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub enum InversionMethod {
    Neumann {
        max_terms: usize,
        tol: f64,
        force: bool,
    },
    Direct {
        regularizer: Regularizer,
    },
}

impl InversionMethod {
    pub fn label(&self) -> &'static str {
        match self {
            InversionMethod::Neumann { .. } => "neumann",
            InversionMethod::Direct { .. } => "direct",
        }
    }
}

/// Full configuration of one order recovery.
#[derive(Debug, Clone)]
pub struct RecoveryConfig {
    pub xi: XiChoice,
    pub m_max: usize,
    pub grid: InversionGrid,
    pub route: DataRoute,
    pub method: InversionMethod,
    pub compute_norms: bool,
}

impl RecoveryConfig {
    pub fn default_for(b: f64) -> Result<Self> {
        Ok(Self {
            xi: XiChoice::Auto,
            m_max: 64,
            grid: InversionGrid::closed(b, 512)?,
            route: DataRoute::FData,
            method: InversionMethod::Direct {
                regularizer: Regularizer::Identity,
            },
            compute_norms: false,
        })
    }
}

/// One recovered coefficient with its quality metrics.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub order_n: usize,
    pub nodes: Vec<f64>,
    pub q: Vec<f64>,
    /// Imaginary part of the raw recovery at each node (dropped from `q`).
    pub q_imag: Vec<f64>,
    /// Largest `|Im|` of the raw recovery before realification.
    pub imag_residual: f64,
    /// `||K phi - p|| / ||p||`.
    pub linear_residual: f64,
    pub xi: f64,
    pub m_max: usize,
    pub method: &'static str,
    pub route: DataRoute,
    pub s_xi: f64,
    pub neumann_terms: Option<usize>,
    pub warnings: Vec<String>,
}

/// Recovers `q_{n-1}` from the data set: choose `xi`, assemble the contour
/// system, invert, undo the exponential weight
/// (`q_{n-1}(x) = e^{-xi nu x} phi(x)`), and realify.
pub fn recover_q(d: &DataSetDn, cfg: &RecoveryConfig) -> Result<ReconstructionResult> {
    let nu = cfg.route.envelope_factor(d.n);
    let q0_l1 = d.q0().l1_norm();
    let xi0 = find_xi0_for_route(d.n, d.b, q0_l1, nu);
    let xi = match cfg.xi {
        XiChoice::Auto => {
            if xi0 == 0.0 {
                1.0 / d.b
            } else {
                (2.0 * xi0).max(1.0 / d.b)
            }
        }
        XiChoice::Fixed(value) => value,
    };

    let mut warnings = Vec::new();
    if xi <= xi0 {
        warnings.push(format!(
            "xi = {xi:.6} does not exceed the threshold xi0 = {xi0:.6}; the series bound does not apply"
        ));
    }

    let sys_cfg = SystemConfig {
        m_max: cfg.m_max,
        grid: cfg.grid.clone(),
        route: cfg.route,
        compute_norms: cfg.compute_norms,
    };
    let sys = build_system(d, xi, &sys_cfg)?;

    let (phi, linear_residual, neumann_terms) = match &cfg.method {
        InversionMethod::Neumann {
            max_terms,
            tol,
            force,
        } => {
            let outcome = invert_neumann(&sys, *max_terms, *tol, *force)?;
            if !outcome.converged {
                warnings.push(format!(
                    "Neumann series stopped at {} terms without reaching tolerance",
                    outcome.terms
                ));
            }
            let k_phi = sys.apply_kernel(&outcome.phi);
            let res: Vec<Complex64> = k_phi.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
            let rel = vector_norm(&res) / vector_norm(&sys.rhs).max(1e-300);
            (outcome.phi, rel, Some(outcome.terms))
        }
        InversionMethod::Direct { regularizer } => {
            let outcome = invert_direct(&sys, *regularizer)?;
            (outcome.phi, outcome.relative_residual, None)
        }
    };

    let mut q = Vec::with_capacity(phi.len());
    let mut q_imag = Vec::with_capacity(phi.len());
    let mut imag_residual: f64 = 0.0;
    for (value, &t) in phi.iter().zip(&sys.nodes) {
        let raw = value * (-xi * nu as f64 * t).exp();
        imag_residual = imag_residual.max(raw.im.abs());
        q.push(raw.re);
        q_imag.push(raw.im);
    }
    let q_sup = q.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if imag_residual > 0.05 * q_sup.max(1e-300) {
        warnings.push(format!(
            "reconstruction poorly resolved; increase M or k coverage (imag residual {imag_residual:.3e} vs sup |q| {q_sup:.3e})"
        ));
    }

    Ok(ReconstructionResult {
        order_n: d.n,
        nodes: sys.nodes.clone(),
        q,
        q_imag,
        imag_residual,
        linear_residual,
        xi,
        m_max: cfg.m_max,
        method: cfg.method.label(),
        route: cfg.route,
        s_xi: sys.diagnostics.s_xi,
        neumann_terms,
        warnings,
    })
}

/// Recursive recovery of `q_1 .. q_{N_target - 1}`: each recovered
/// coefficient is appended to the known list (as a tabulated function) and
/// feeds the forcing of the next order.
pub fn recover_all(
    data: &OrderData,
    q0: CoefficientFunction,
    n_target: usize,
    cfg: &RecoveryConfig,
) -> Result<Vec<ReconstructionResult>> {
    let closed_grid = match &cfg.grid {
        InversionGrid::ClosedSimpson(g) => g.clone(),
        InversionGrid::PeriodicUniform { .. } => {
            return Err(Error::contract(
                "recover_all",
                "recursive recovery needs the closed grid so recovered samples become tabulated coefficients",
            ))
        }
    };
    let b = q0.support_width();
    let mut known = vec![q0];
    let mut results = Vec::new();
    for n in 2..=n_target {
        let d = DataSetDn::new(n, b, data.clone(), known.clone()).map_err(|e| e.at_order(n))?;
        let result = recover_q(&d, cfg).map_err(|e| e.at_order(n))?;
        let tabulated = CoefficientFunction::tabulated(closed_grid.clone(), result.q.clone())
            .map_err(|e| e.at_order(n))?;
        known.push(tabulated);
        results.push(result);
    }
    Ok(results)
}
