//! The amplitude-expansion cascade. Writing `u = sum_n eps^n u_n`, the order
//! functions solve linear problems: `u_1` is the Jost solution of
//! `-u'' + q0 u = k^2 u` with `u_1 = e^{-ikx}` for `x <= 0`, and each
//! `u_n` (`n >= 2`) solves the same linear equation driven by a forcing
//! `g_n = q_{n-1} u_1^n + h_n` built from lower orders. Endpoint matching
//! yields the series coefficients `A_n(k)`, `B_n(k)`, and a Vandermonde fit
//! extracts the same coefficients from amplitude-sampled sweep data.
//!
//! Everything here is entire in k, so the cascade also runs on the complex
//! contour used by the inversion stage.

use std::io::{BufWriter, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::ScatteringSweep;
use crate::numerics::{
    condition_estimate, integrate_ivp, integrate_system, solve_dense, ComplexMatrix,
    ComplexTrajectory, Direction, SpatialGrid,
};
use crate::potential::{CoefficientFunction, NonlinearPotential};

const WRONSKIAN_TOLERANCE: f64 = 1e-6;

/// The Jost pair of the linear problem at one wavenumber, with the
/// scattering coefficients read off `u_1` at `x = b`.
#[derive(Debug, Clone)]
pub struct JostSolutions {
    pub k: Complex64,
    /// Jost solution from the right: `e^{-ikx}` for `x <= 0`.
    pub u1: ComplexTrajectory,
    /// Jost solution from the left: `e^{ikx}` for `x >= b`.
    pub v1: ComplexTrajectory,
    pub a1: Complex64,
    pub b1: Complex64,
}

impl JostSolutions {
    /// Transmission coefficient `T = 1 / B_1`.
    pub fn transmission(&self) -> Complex64 {
        1.0 / self.b1
    }

    /// Right reflection coefficient `R = A_1 / B_1`.
    pub fn reflection(&self) -> Complex64 {
        self.a1 / self.b1
    }

    /// `B_1` recovered from the Wronskian identity
    /// `2ik B_1 = v_1' u_1 - v_1 u_1'` at one node.
    pub fn wronskian_b1_at(&self, index: usize) -> Complex64 {
        let w = self.v1.slope(index) * self.u1.value(index)
            - self.v1.value(index) * self.u1.slope(index);
        w / (2.0 * Complex64::i() * self.k)
    }

    /// Resolvent kernel
    /// `G(x, t) = -v_1(max) u_1(min) / (2ik B_1)`; symmetric in `(x, t)`.
    pub fn green(&self, x: f64, t: f64) -> Result<Complex64> {
        if self.b1.norm() < 1e-10 {
            return Err(Error::NearResonance {
                magnitude: self.b1.norm(),
                k: format!("{}", self.k),
            });
        }
        let (lo, hi) = if x <= t { (x, t) } else { (t, x) };
        let (u_lo, _) = self.u1.at(lo);
        let (v_hi, _) = self.v1.at(hi);
        Ok(-v_hi * u_lo / (2.0 * Complex64::i() * self.k * self.b1))
    }

    /// `w(x) = -int_0^b G(x, t) g(t) dt` at every node, evaluated through
    /// the split form
    /// `w(x) = [v_1(x) int_0^x u_1 g + u_1(x) int_x^b v_1 g] / (2ik B_1)`
    /// so each cumulative integrand stays smooth.
    pub fn resolvent_apply(&self, g: &ComplexTrajectory) -> Result<Vec<Complex64>> {
        if self.b1.norm() < 1e-10 {
            return Err(Error::NearResonance {
                magnitude: self.b1.norm(),
                k: format!("{}", self.k),
            });
        }
        let grid = self.u1.grid();
        if g.len() != grid.len() {
            return Err(Error::contract(
                "resolvent_apply",
                format!("expected {} forcing samples, got {}", grid.len(), g.len()),
            ));
        }
        let u1g: Vec<Complex64> = (0..grid.len())
            .map(|i| self.u1.value(i) * g.value(i))
            .collect();
        let v1g: Vec<Complex64> = (0..grid.len())
            .map(|i| self.v1.value(i) * g.value(i))
            .collect();
        let cum_u = crate::numerics::cumquad(&u1g, grid)?;
        let cum_v = crate::numerics::cumquad(&v1g, grid)?;
        let total_v = *cum_v.last().expect("grid is never empty");
        let denom = 2.0 * Complex64::i() * self.k * self.b1;
        Ok((0..grid.len())
            .map(|i| {
                (self.v1.value(i) * cum_u[i] + self.u1.value(i) * (total_v - cum_v[i])) / denom
            })
            .collect())
    }
}

/// Cascade orders `u_1 .. u_N` at one wavenumber with their endpoint
/// coefficients; `coefficients[n-1] = (A_n, B_n)`.
#[derive(Debug, Clone)]
pub struct CascadeState {
    pub k: Complex64,
    pub trajectories: Vec<ComplexTrajectory>,
    pub coefficients: Vec<(Complex64, Complex64)>,
}

impl CascadeState {
    pub fn order(&self) -> usize {
        self.trajectories.len()
    }

    pub fn u(&self, n: usize) -> &ComplexTrajectory {
        &self.trajectories[n - 1]
    }

    pub fn ab(&self, n: usize) -> (Complex64, Complex64) {
        self.coefficients[n - 1]
    }
}

/// Integrates `u_1'' = (q0 - k^2) u_1` from `u_1(0) = 1`, `u_1'(0) = -ik`.
pub fn jost_right(
    q0: &CoefficientFunction,
    k: Complex64,
    grid: &SpatialGrid,
) -> Result<ComplexTrajectory> {
    let k2 = k * k;
    integrate_ivp(
        |x, u, _du| (q0.eval(x) - k2) * u,
        Complex64::new(1.0, 0.0),
        -Complex64::i() * k,
        grid,
        Direction::Forward,
    )
}

/// Integrates backward from `v_1(b) = e^{ikb}`, `v_1'(b) = ik e^{ikb}`.
pub fn jost_left(
    q0: &CoefficientFunction,
    k: Complex64,
    grid: &SpatialGrid,
) -> Result<ComplexTrajectory> {
    let k2 = k * k;
    let phase = (Complex64::i() * k * grid.width()).exp();
    integrate_ivp(
        |x, u, _du| (q0.eval(x) - k2) * u,
        phase,
        Complex64::i() * k * phase,
        grid,
        Direction::Backward,
    )
}

/// Endpoint extraction of the plane-wave coefficients at `x = b`:
/// `A_n = e^{-ikb} (k u - i u') / (2k)`, `B_n = e^{ikb} (k u + i u') / (2k)`.
pub fn extract_ab(
    value: Complex64,
    slope: Complex64,
    k: Complex64,
    b: f64,
) -> Result<(Complex64, Complex64)> {
    if k.norm() == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let i = Complex64::i();
    let a = (-i * k * b).exp() * (k * value - i * slope) / (2.0 * k);
    let bb = (i * k * b).exp() * (k * value + i * slope) / (2.0 * k);
    Ok((a, bb))
}

/// Builds the Jost pair and checks the Wronskian identity
/// `2ik B_1 = v_1' u_1 - v_1 u_1'` across the grid.
pub fn linear_scattering(
    q0: &CoefficientFunction,
    k: Complex64,
    grid: &SpatialGrid,
) -> Result<JostSolutions> {
    if k.norm() == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let u1 = jost_right(q0, k, grid)?;
    let v1 = jost_left(q0, k, grid)?;
    let (a1, b1) = extract_ab(u1.end_value(), u1.end_slope(), k, grid.width())?;

    let two_ik_b1 = 2.0 * Complex64::i() * k * b1;
    let scale = two_ik_b1.norm().max(1e-300);
    let mut max_dev: f64 = 0.0;
    for i in 0..grid.len() {
        let w = v1.slope(i) * u1.value(i) - v1.value(i) * u1.slope(i);
        max_dev = max_dev.max((w - two_ik_b1).norm() / scale);
    }
    if max_dev > WRONSKIAN_TOLERANCE {
        return Err(Error::WronskianInconsistency {
            deviation: max_dev,
            tolerance: WRONSKIAN_TOLERANCE,
            k: format!("{k}"),
        });
    }
    Ok(JostSolutions { k, u1, v1, a1, b1 })
}

/// Coefficient of `eps^n` in `(sum_{m=1}^{L} eps^m values[m-1])^j`, by
/// repeated truncated convolution.
fn power_series_coefficient(values: &[Complex64], j: usize, n: usize) -> Complex64 {
    // current[d] = coefficient of eps^d, truncated at degree n
    let mut current = vec![Complex64::new(0.0, 0.0); n + 1];
    current[0] = Complex64::new(1.0, 0.0);
    for _ in 0..j {
        let mut next = vec![Complex64::new(0.0, 0.0); n + 1];
        for (d, &c) in current.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (m, &v) in values.iter().enumerate() {
                let degree = d + m + 1;
                if degree > n {
                    break;
                }
                next[degree] += c * v;
            }
        }
        current = next;
    }
    current[n]
}

/// Value and x-derivative of the `eps^n` coefficient of `P^j` where
/// `P = sum eps^m u_m`; the derivative is the `eps^n` coefficient of
/// `j P^{j-1} P'`.
fn power_series_coefficient_with_slope(
    values: &[Complex64],
    slopes: &[Complex64],
    j: usize,
    n: usize,
) -> (Complex64, Complex64) {
    let value = power_series_coefficient(values, j, n);
    // coefficients of P^{j-1} up to degree n
    let mut pow = vec![Complex64::new(0.0, 0.0); n + 1];
    pow[0] = Complex64::new(1.0, 0.0);
    for _ in 0..j.saturating_sub(1) {
        let mut next = vec![Complex64::new(0.0, 0.0); n + 1];
        for (d, &c) in pow.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for (m, &v) in values.iter().enumerate() {
                let degree = d + m + 1;
                if degree > n {
                    break;
                }
                next[degree] += c * v;
            }
        }
        pow = next;
    }
    let mut slope = Complex64::new(0.0, 0.0);
    for (d, &c) in pow.iter().enumerate() {
        for (m, &dv) in slopes.iter().enumerate() {
            if d + m + 1 == n {
                slope += c * dv;
            }
        }
    }
    (value, slope * j as f64)
}

/// Pointwise coefficient of `eps^n` in `(eps u_1 + ... + eps^{L} u_L)^j`
/// for the supplied trajectories, with slopes accumulated by the product
/// rule. Requires `2 <= j <= n - 1`.
pub fn power_coefficients(
    u_list: &[ComplexTrajectory],
    j: usize,
    n: usize,
) -> Result<ComplexTrajectory> {
    if j < 2 || j + 1 > n {
        return Err(Error::contract(
            "power_coefficients",
            format!("power j = {j} outside [2, n-1] for n = {n}"),
        ));
    }
    if u_list.is_empty() {
        return Err(Error::contract("power_coefficients", "empty cascade"));
    }
    let grid = u_list[0].grid().clone();
    let n_nodes = grid.len();
    let mut values = Vec::with_capacity(n_nodes);
    let mut slopes = Vec::with_capacity(n_nodes);
    for node in 0..n_nodes {
        let vals: Vec<Complex64> = u_list.iter().map(|u| u.value(node)).collect();
        let slps: Vec<Complex64> = u_list.iter().map(|u| u.slope(node)).collect();
        let (v, s) = power_series_coefficient_with_slope(&vals, &slps, j, n);
        values.push(v);
        slopes.push(s);
    }
    ComplexTrajectory::new(grid, values, slopes)
}

/// Forcing pair for cascade order `n`:
/// `h_n = sum_{j=2}^{n-1} C_{jn} q_{j-1}` (zero for `n = 2`) and
/// `g_n = q_{n-1} u_1^n + h_n`.
pub fn forcing(
    p: &NonlinearPotential,
    state: &CascadeState,
    n: usize,
) -> Result<(ComplexTrajectory, ComplexTrajectory)> {
    if n < 2 {
        return Err(Error::contract(
            "forcing",
            format!("order n = {n} must be >= 2"),
        ));
    }
    if state.order() < n - 1 {
        return Err(Error::contract(
            "forcing",
            format!(
                "cascade holds {} orders, order {n} needs {}",
                state.order(),
                n - 1
            ),
        ));
    }
    let grid = state.u(1).grid().clone();
    let n_nodes = grid.len();
    let zero = Complex64::new(0.0, 0.0);

    let mut h_values = vec![zero; n_nodes];
    let mut h_slopes = vec![zero; n_nodes];
    for j in 2..n {
        let q = p.coeff(j - 1);
        if q.is_zero() {
            continue;
        }
        let c_jn = power_coefficients(&state.trajectories[..n - 1], j, n)?;
        for (node, x) in grid.nodes().enumerate() {
            let qx = q.eval(x);
            h_values[node] += c_jn.value(node) * qx;
            // q is only piecewise smooth; the forcing slope is used for
            // diagnostics, so the coefficient is treated as locally constant
            h_slopes[node] += c_jn.slope(node) * qx;
        }
    }

    let q_top = p.coeff(n - 1);
    let mut g_values = h_values.clone();
    let mut g_slopes = h_slopes.clone();
    for (node, x) in grid.nodes().enumerate() {
        let qx = q_top.eval(x);
        if qx != 0.0 {
            let u1 = state.u(1).value(node);
            let du1 = state.u(1).slope(node);
            let pow = u1.powu((n - 1) as u32);
            g_values[node] += qx * pow * u1;
            g_slopes[node] += qx * pow * du1 * n as f64;
        }
    }

    let h = ComplexTrajectory::new(grid.clone(), h_values, h_slopes)?;
    let g = ComplexTrajectory::new(grid, g_values, g_slopes)?;
    Ok((g, h))
}

/// Forcing value for order `m` at an arbitrary position, given the values of
/// `u_1 .. u_{m-1}` there. Used inside the joint RK4 right-hand side so the
/// cascade needs no interpolation at stage midpoints.
fn forcing_value_at(
    p: &NonlinearPotential,
    x: f64,
    lower_orders: &[Complex64],
    m: usize,
) -> Complex64 {
    let mut g = Complex64::new(0.0, 0.0);
    let q_top = p.coeff(m - 1);
    let qx = q_top.eval(x);
    if qx != 0.0 {
        g += qx * lower_orders[0].powu(m as u32);
    }
    for j in 2..m {
        let q = p.coeff(j - 1);
        let qjx = q.eval(x);
        if qjx == 0.0 {
            continue;
        }
        g += qjx * power_series_coefficient(&lower_orders[..m - 1], j, m);
    }
    g
}

/// Cascade trajectories without endpoint extraction; regular at every
/// complex k including zero.
pub fn cascade_trajectories(
    p: &NonlinearPotential,
    k: Complex64,
    n_max: usize,
    grid: &SpatialGrid,
) -> Result<Vec<ComplexTrajectory>> {
    if n_max < 1 {
        return Err(Error::contract("solve_cascade", "N_max must be >= 1"));
    }
    let k2 = k * k;
    let dim = 2 * n_max;
    let mut initial = vec![Complex64::new(0.0, 0.0); dim];
    initial[0] = Complex64::new(1.0, 0.0);
    initial[1] = -Complex64::i() * k;

    let rhs = |x: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let q0x = p.q0().eval(x);
        let mut lower = [Complex64::new(0.0, 0.0); 16];
        let lower = &mut lower[..n_max];
        for m in 1..=n_max {
            lower[m - 1] = y[2 * (m - 1)];
        }
        for m in 1..=n_max {
            let idx = 2 * (m - 1);
            dy[idx] = y[idx + 1];
            let mut accel = (q0x - k2) * y[idx];
            if m >= 2 {
                accel += forcing_value_at(p, x, lower, m);
            }
            dy[idx + 1] = accel;
        }
    };

    if n_max > 16 {
        return Err(Error::contract(
            "solve_cascade",
            "cascade orders beyond 16 are not supported",
        ));
    }
    let states = integrate_system(rhs, &initial, grid, Direction::Forward)?;

    let mut trajectories = Vec::with_capacity(n_max);
    for m in 0..n_max {
        let values: Vec<Complex64> = states.iter().map(|s| s[2 * m]).collect();
        let slopes: Vec<Complex64> = states.iter().map(|s| s[2 * m + 1]).collect();
        trajectories.push(ComplexTrajectory::new(grid.clone(), values, slopes)?);
    }
    Ok(trajectories)
}

/// Solves the cascade jointly up to `N_max`: `u_1` from the Jost initial
/// data, and for `n >= 2` the forced equation
/// `u_n'' = (q0 - k^2) u_n + g_n` with `u_n(0) = u_n'(0) = 0`. Endpoint
/// matching needs `k != 0`.
pub fn solve_cascade(
    p: &NonlinearPotential,
    k: Complex64,
    n_max: usize,
    grid: &SpatialGrid,
) -> Result<CascadeState> {
    if k.norm() == 0.0 {
        return Err(Error::ZeroWavenumber);
    }
    let trajectories = cascade_trajectories(p, k, n_max, grid)?;
    let coefficients = trajectories
        .iter()
        .map(|t| extract_ab(t.end_value(), t.end_slope(), k, grid.width()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CascadeState {
        k,
        trajectories,
        coefficients,
    })
}

/// Provenance of a coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesSource {
    Cascade,
    Extracted,
}

/// Per-order arrays `A_n(k)`, `B_n(k)` over a wavenumber grid.
#[derive(Debug, Clone)]
pub struct SeriesCoefficients {
    pub k_grid: Vec<Complex64>,
    /// `orders[n-1]` holds the order-`n` coefficient arrays.
    pub a: Vec<Vec<Complex64>>,
    pub b: Vec<Vec<Complex64>>,
    pub source: SeriesSource,
    /// Per-k sup-norm residual of the amplitude fit (zero for cascade data).
    pub fit_residuals: Vec<f64>,
}

impl SeriesCoefficients {
    pub fn order_count(&self) -> usize {
        self.a.len()
    }

    pub fn a_n(&self, n: usize) -> &[Complex64] {
        &self.a[n - 1]
    }

    pub fn b_n(&self, n: usize) -> &[Complex64] {
        &self.b[n - 1]
    }

    /// Delimited text export: one row per (order, k) pair.
    pub fn write_table<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(writer);
        writeln!(out, "n,re_k,im_k,re_a,im_a,re_b,im_b,fit_residual")?;
        for n in 1..=self.order_count() {
            for (i, k) in self.k_grid.iter().enumerate() {
                writeln!(
                    out,
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    n,
                    k.re,
                    k.im,
                    self.a[n - 1][i].re,
                    self.a[n - 1][i].im,
                    self.b[n - 1][i].re,
                    self.b[n - 1][i].im,
                    self.fit_residuals[i],
                )?;
            }
        }
        out.flush()
    }
}

/// Computes cascade-series coefficients on a real-k grid (the generative
/// counterpart of [`extract_series`]).
pub fn cascade_series(
    p: &NonlinearPotential,
    k_grid: &[f64],
    n_max: usize,
    grid: &SpatialGrid,
) -> Result<SeriesCoefficients> {
    let mut a = vec![Vec::with_capacity(k_grid.len()); n_max];
    let mut b = vec![Vec::with_capacity(k_grid.len()); n_max];
    for &k in k_grid {
        let state = solve_cascade(p, Complex64::new(k, 0.0), n_max, grid)?;
        for n in 1..=n_max {
            let (an, bn) = state.ab(n);
            a[n - 1].push(an);
            b[n - 1].push(bn);
        }
    }
    Ok(SeriesCoefficients {
        k_grid: k_grid.iter().map(|&k| Complex64::new(k, 0.0)).collect(),
        a,
        b,
        source: SeriesSource::Cascade,
        fit_residuals: vec![0.0; k_grid.len()],
    })
}

/// Least-squares fit of `A(k; eps) = sum_{n=1}^{N} eps^n A_n(k)` (no
/// constant term) to amplitude-sampled sweep data, per k; the same
/// Vandermonde factorization handles `B`.
pub fn extract_series(sweep: &ScatteringSweep, n_max: usize) -> Result<SeriesCoefficients> {
    let eps = &sweep.eps_list;
    if eps.len() < n_max {
        return Err(Error::contract(
            "extract_series",
            format!("need at least {n_max} eps samples, got {}", eps.len()),
        ));
    }
    for (i, e) in eps.iter().enumerate() {
        if e.norm() == 0.0 {
            return Err(Error::contract(
                "extract_series",
                "eps values must be nonzero",
            ));
        }
        for other in &eps[..i] {
            if (e - other).norm() == 0.0 {
                return Err(Error::contract(
                    "extract_series",
                    "eps values must be distinct",
                ));
            }
        }
    }

    // Vandermonde in powers eps^1 .. eps^N with column scaling
    let rows = eps.len();
    let mut vmat = ComplexMatrix::zeros(rows, n_max);
    for (r, &e) in eps.iter().enumerate() {
        let mut p = Complex64::new(1.0, 0.0);
        for c in 0..n_max {
            p *= e;
            vmat.set(r, c, p);
        }
    }
    let scales: Vec<f64> = (0..n_max)
        .map(|c| {
            (0..rows)
                .map(|r| vmat.get(r, c).norm())
                .fold(0.0, f64::max)
                .max(1e-300)
        })
        .collect();
    let mut scaled = ComplexMatrix::zeros(rows, n_max);
    for r in 0..rows {
        for c in 0..n_max {
            scaled.set(r, c, vmat.get(r, c) / scales[c]);
        }
    }
    // normal equations of the scaled system
    let mut normal = ComplexMatrix::zeros(n_max, n_max);
    for i in 0..n_max {
        for j in 0..n_max {
            let mut sum = Complex64::new(0.0, 0.0);
            for r in 0..rows {
                sum += scaled.get(r, i).conj() * scaled.get(r, j);
            }
            normal.set(i, j, sum);
        }
    }
    let condition = condition_estimate(&normal)?;
    if condition > 1e12 {
        return Err(Error::IllConditionedExtraction { condition });
    }

    let fit = |samples: &[Complex64]| -> Result<(Vec<Complex64>, f64)> {
        let mut rhs = vec![Complex64::new(0.0, 0.0); n_max];
        for c in 0..n_max {
            for r in 0..rows {
                rhs[c] += scaled.get(r, c).conj() * samples[r];
            }
        }
        let solution = solve_dense(&normal, &rhs)?;
        let coeffs: Vec<Complex64> = solution.x.iter().zip(&scales).map(|(x, s)| x / s).collect();
        let residual = (0..rows)
            .map(|r| {
                let model: Complex64 = (0..n_max).map(|c| vmat.get(r, c) * coeffs[c]).sum();
                (model - samples[r]).norm()
            })
            .fold(0.0, f64::max);
        Ok((coeffs, residual))
    };

    let mut a = vec![Vec::with_capacity(sweep.k_grid.len()); n_max];
    let mut b = vec![Vec::with_capacity(sweep.k_grid.len()); n_max];
    let mut fit_residuals = Vec::with_capacity(sweep.k_grid.len());
    for ki in 0..sweep.k_grid.len() {
        let a_samples: Vec<Complex64> = (0..rows).map(|ei| sweep.entry(ki, ei).outgoing).collect();
        let b_samples: Vec<Complex64> = (0..rows).map(|ei| sweep.entry(ki, ei).incoming).collect();
        let (a_coeffs, res_a) = fit(&a_samples)?;
        let (b_coeffs, res_b) = fit(&b_samples)?;
        for n in 0..n_max {
            a[n].push(a_coeffs[n]);
            b[n].push(b_coeffs[n]);
        }
        fit_residuals.push(res_a.max(res_b));
    }
    Ok(SeriesCoefficients {
        k_grid: sweep
            .k_grid
            .iter()
            .map(|&k| Complex64::new(k, 0.0))
            .collect(),
        a,
        b,
        source: SeriesSource::Extracted,
        fit_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::sweep;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> SpatialGrid {
        SpatialGrid::new(1.0, 2000).unwrap()
    }

    fn pure_q2(gamma: f64) -> NonlinearPotential {
        NonlinearPotential::single_term(1.0, 2, CoefficientFunction::constant(gamma, 1.0)).unwrap()
    }

    #[test]
    fn free_jost_right_is_plane_wave() {
        let q0 = CoefficientFunction::zero(1.0);
        let u1 = jost_right(&q0, c(1.4, 0.0), &grid()).unwrap();
        let mut max_err: f64 = 0.0;
        for (i, x) in u1.grid().nodes().enumerate() {
            max_err = max_err.max((u1.value(i) - c(0.0, -1.4 * x).exp()).norm());
        }
        assert!(max_err <= 1e-9);
    }

    #[test]
    fn free_jost_right_at_imaginary_k_grows() {
        let q0 = CoefficientFunction::zero(1.0);
        let u1 = jost_right(&q0, c(0.0, 1.0), &grid()).unwrap();
        let mut max_err: f64 = 0.0;
        for (i, x) in u1.grid().nodes().enumerate() {
            max_err = max_err.max((u1.value(i) - c(x.exp(), 0.0)).norm());
        }
        assert!(max_err <= 1e-9);
        assert!((u1.end_value().re - 1.0_f64.exp()).abs() <= 1e-9);
    }

    #[test]
    fn constant_q0_jost_solutions_match_closed_form() {
        let q0 = CoefficientFunction::constant(1.0, 1.0);
        let k = c(2.0, 0.0);
        let omega = (k * k - 1.0).sqrt();
        let u1 = jost_right(&q0, k, &grid()).unwrap();
        let mut max_err: f64 = 0.0;
        for (i, x) in u1.grid().nodes().enumerate() {
            let exact = (omega * x).cos() - Complex64::i() * k * (omega * x).sin() / omega;
            max_err = max_err.max((u1.value(i) - exact).norm());
        }
        assert!(max_err <= 1e-8, "u1 error {max_err:e}");

        // v1 backward: closed form with data at x = b
        let v1 = jost_left(&q0, k, &grid()).unwrap();
        let b = 1.0;
        let phase = (Complex64::i() * k * b).exp();
        let mut max_err_v: f64 = 0.0;
        for (i, x) in v1.grid().nodes().enumerate() {
            let s = x - b;
            let exact =
                phase * ((omega * s).cos() + Complex64::i() * k * (omega * s).sin() / omega);
            max_err_v = max_err_v.max((v1.value(i) - exact).norm());
        }
        assert!(max_err_v <= 1e-8, "v1 error {max_err_v:e}");
    }

    #[test]
    fn free_linear_scattering_is_trivial() {
        let q0 = CoefficientFunction::zero(1.0);
        let jost = linear_scattering(&q0, c(1.0, 0.0), &grid()).unwrap();
        assert!(jost.a1.norm() <= 1e-10);
        assert!((jost.b1 - 1.0).norm() <= 1e-10);
    }

    #[test]
    fn linear_unitarity_for_constant_q0() {
        let q0 = CoefficientFunction::constant(1.0, 1.0);
        let jost = linear_scattering(&q0, c(2.0, 0.0), &grid()).unwrap();
        let conserved = jost.b1.norm_sqr() - jost.a1.norm_sqr();
        assert!(
            (conserved - 1.0).abs() <= 1e-8,
            "|B1|^2 - |A1|^2 = {conserved}"
        );
    }

    #[test]
    fn wronskian_route_matches_endpoint_route() {
        let q0 = CoefficientFunction::constant(1.0, 1.0);
        let jost = linear_scattering(&q0, c(2.0, 0.0), &grid()).unwrap();
        for index in [0, 500, 1000, 2000] {
            assert!((jost.wronskian_b1_at(index) - jost.b1).norm() <= 1e-8);
        }
    }

    #[test]
    fn power_coefficients_match_hand_expansion() {
        let g = SpatialGrid::new(1.0, 2).unwrap();
        let traj = |v: f64| ComplexTrajectory::constant(g.clone(), c(v, 0.0));
        // u1 = 2, u2 = 3, u3 = 5, u4 = 7
        let us = vec![traj(2.0), traj(3.0), traj(5.0), traj(7.0)];

        // j=2, n=3: 2 u1 u2 = 12
        let c23 = power_coefficients(&us, 2, 3).unwrap();
        assert!((c23.value(0) - c(12.0, 0.0)).norm() <= 1e-14);

        // j=2, n=4: 2 u1 u3 + u2^2 = 20 + 9 = 29
        let c24 = power_coefficients(&us, 2, 4).unwrap();
        assert!((c24.value(0) - c(29.0, 0.0)).norm() <= 1e-14);

        // j=3, n=5: 3(u1 u2^2 + u1^2 u3) = 3(18 + 20) = 114
        let c35 = power_coefficients(&us, 3, 5).unwrap();
        assert!((c35.value(0) - c(114.0, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn power_coefficient_slopes_follow_product_rule() {
        let g = SpatialGrid::new(1.0, 2).unwrap();
        let mk = |v: f64, s: f64| {
            ComplexTrajectory::new(g.clone(), vec![c(v, 0.0); 3], vec![c(s, 0.0); 3]).unwrap()
        };
        // d/dx (2 u1 u2) = 2 u1' u2 + 2 u1 u2'
        let us = vec![mk(2.0, 0.5), mk(3.0, -1.0)];
        let c23 = power_coefficients(&us, 2, 3).unwrap();
        let expected = 2.0 * (0.5 * 3.0 + -2.0);
        assert!((c23.slope(0) - c(expected, 0.0)).norm() <= 1e-14);
    }

    #[test]
    fn forcing_orders_match_listed_expansions() {
        let b = 1.0;
        // q1 = q2 = q3 = 1, all cascade orders pinned to 1
        let p = NonlinearPotential::new(
            b,
            vec![
                CoefficientFunction::zero(b),
                CoefficientFunction::constant(1.0, b),
                CoefficientFunction::constant(1.0, b),
                CoefficientFunction::constant(1.0, b),
            ],
        )
        .unwrap();
        let g = SpatialGrid::new(b, 2).unwrap();
        let ones = vec![ComplexTrajectory::constant(g.clone(), c(1.0, 0.0)); 4];
        let state = CascadeState {
            k: c(1.0, 0.0),
            trajectories: ones,
            coefficients: vec![(c(0.0, 0.0), c(0.0, 0.0)); 4],
        };
        // h5 = 2(u1 u4 + u2 u3) q1 + 3(u1 u2^2 + u1^2 u3) q2 + 4 u1^3 u2 q3 = 4 + 6 + 4 = 14
        let (_, h5) = forcing(&p, &state, 5).unwrap();
        for node in 0..h5.len() {
            assert!((h5.value(node) - c(14.0, 0.0)).norm() <= 1e-13);
        }
        // h2 = 0 for any state
        let (_, h2) = forcing(&p, &state, 2).unwrap();
        assert_eq!(h2.sup_norm(), 0.0);
    }

    #[test]
    fn pure_q2_forcing_has_no_h3() {
        let p = pure_q2(1.0);
        let g = grid();
        let state = solve_cascade(&p, c(1.0, 0.0), 2, &g).unwrap();
        let (g3, h3) = forcing(&p, &state, 3).unwrap();
        assert_eq!(h3.sup_norm(), 0.0);
        // g3 = q2 u1^3 = e^{-3ikx} for the free linear problem
        let mut max_err: f64 = 0.0;
        for (i, x) in g.nodes().enumerate() {
            max_err = max_err.max((g3.value(i) - c(0.0, -3.0 * x).exp()).norm());
        }
        assert!(max_err <= 1e-8);
    }

    #[test]
    fn pure_q2_cascade_second_order_vanishes() {
        let p = pure_q2(1.0);
        let state = solve_cascade(&p, c(1.0, 0.0), 3, &grid()).unwrap();
        assert_eq!(state.u(2).sup_norm(), 0.0);
        let (a2, b2) = state.ab(2);
        assert_eq!(a2.norm(), 0.0);
        assert_eq!(b2.norm(), 0.0);
    }

    #[test]
    fn pure_q2_third_order_matches_closed_form() {
        let gamma = 1.0;
        let p = pure_q2(gamma);
        for k in [0.7, 1.0, 2.5] {
            let state = solve_cascade(&p, c(k, 0.0), 3, &grid()).unwrap();
            let (a3, b3) = state.ab(3);
            let a3_exact = -(gamma / (8.0 * k * k)) * (1.0 - c(0.0, -4.0 * k).exp());
            let b3_exact = (gamma / (4.0 * k * k)) * (1.0 - c(0.0, -2.0 * k).exp());
            assert!((a3 - a3_exact).norm() <= 1e-7, "A3 mismatch at k = {k}");
            assert!((b3 - b3_exact).norm() <= 1e-7, "B3 mismatch at k = {k}");
        }
    }

    #[test]
    fn zero_potential_cascade_is_trivial_beyond_first_order() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let state = solve_cascade(&p, c(1.0, 0.0), 4, &grid()).unwrap();
        for n in 2..=4 {
            assert_eq!(state.u(n).sup_norm(), 0.0);
        }
    }

    #[test]
    fn extract_ab_round_trips_endpoint() {
        let k = c(1.3, 0.4);
        let b = 1.0;
        let value = c(0.7, -0.2);
        let slope = c(0.1, 0.9);
        let (a, bb) = extract_ab(value, slope, k, b).unwrap();
        let i = Complex64::i();
        let reassembled = a * (i * k * b).exp() + bb * (-i * k * b).exp();
        assert!((reassembled - value).norm() <= 1e-14);
        let slope_re = i * k * (a * (i * k * b).exp() - bb * (-i * k * b).exp());
        assert!((slope_re - slope).norm() <= 1e-14);
    }

    #[test]
    fn green_function_free_space_at_imaginary_k() {
        let q0 = CoefficientFunction::zero(1.0);
        let jost = linear_scattering(&q0, c(0.0, 1.0), &grid()).unwrap();
        for (x, t) in [(0.2, 0.8), (0.6, 0.3), (0.5, 0.5)] {
            let g = jost.green(x, t).unwrap();
            let exact = 0.5 * (-(x - t).abs()).exp();
            assert!((g - c(exact, 0.0)).norm() <= 1e-8, "G({x},{t})");
        }
    }

    #[test]
    fn green_function_is_symmetric() {
        let q0 = CoefficientFunction::constant(0.5, 1.0);
        let jost = linear_scattering(&q0, c(0.4, 1.2), &grid()).unwrap();
        let g1 = jost.green(0.3, 0.7).unwrap();
        let g2 = jost.green(0.7, 0.3).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn green_function_satisfies_equation_away_from_diagonal() {
        // finite-difference residual of -G_xx + q0 G - k^2 G
        let q0_val = 0.3;
        let q0 = CoefficientFunction::constant(q0_val, 1.0);
        let k = c(0.5, 1.0);
        let g = grid();
        let jost = linear_scattering(&q0, k, &g).unwrap();
        let t = 0.75;
        let h = g.step();
        let mut max_res: f64 = 0.0;
        for i in 200..1000 {
            let x = g.node(i);
            let gm = jost.green(x - h, t).unwrap();
            let g0 = jost.green(x, t).unwrap();
            let gp = jost.green(x + h, t).unwrap();
            let gxx = (gp - 2.0 * g0 + gm) / (h * h);
            let residual = -gxx + (q0_val - k * k) * g0;
            max_res = max_res.max(residual.norm());
        }
        assert!(max_res <= 1e-4, "max residual {max_res:e}");
    }

    #[test]
    fn yn_identity_links_cascade_and_resolvent() {
        // y_2 = u_2 - (B_2 / B_1) u_1 must equal -int G g_2 for Im k > 0
        let b = 1.0;
        let p = NonlinearPotential::new(
            b,
            vec![
                CoefficientFunction::constant(0.2, b),
                CoefficientFunction::sinusoid(0.3, std::f64::consts::PI, b),
            ],
        )
        .unwrap();
        let k = c(0.7, 1.5);
        let g = grid();
        let state = solve_cascade(&p, k, 2, &g).unwrap();
        let jost = linear_scattering(p.q0(), k, &g).unwrap();
        let (g2, _) = forcing(&p, &state, 2).unwrap();
        let resolvent = jost.resolvent_apply(&g2).unwrap();
        let (_, b2) = state.ab(2);
        let ratio = b2 / jost.b1;
        let mut max_dev: f64 = 0.0;
        for i in 0..g.len() {
            let y2 = state.u(2).value(i) - ratio * jost.u1.value(i);
            max_dev = max_dev.max((y2 - resolvent[i]).norm());
        }
        assert!(max_dev <= 1e-5, "identity deviation {max_dev:e}");
    }

    #[test]
    fn extraction_recovers_exact_polynomial_data() {
        // synthetic data A(k; eps) = a eps + c eps^3
        let eps: Vec<Complex64> = [0.02, 0.04, 0.06, 0.08, 0.1]
            .iter()
            .map(|&e| c(e, 0.0))
            .collect();
        let a_true = c(0.3, -0.1);
        let c_true = c(-1.2, 0.8);
        let entries: Vec<crate::forward::PlaneWaveMatch> = eps
            .iter()
            .map(|&e| crate::forward::PlaneWaveMatch {
                k: 1.0,
                epsilon: e,
                outgoing: a_true * e + c_true * e * e * e,
                incoming: e,
            })
            .collect();
        let sweep = ScatteringSweep {
            k_grid: vec![1.0],
            eps_list: eps,
            entries,
            support_width: 1.0,
            degree: 2,
        };
        let series = extract_series(&sweep, 3).unwrap();
        assert!((series.a_n(1)[0] - a_true).norm() <= 1e-10);
        assert!(series.a_n(2)[0].norm() <= 1e-10);
        assert!((series.a_n(3)[0] - c_true).norm() <= 1e-10);
        assert!((series.b_n(1)[0] - 1.0).norm() <= 1e-10);
        assert!(series.fit_residuals[0] <= 1e-12);
    }

    #[test]
    fn extraction_from_zero_potential_sweep() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let eps: Vec<Complex64> = [0.02, 0.04, 0.06, 0.08, 0.1]
            .iter()
            .map(|&e| c(e, 0.0))
            .collect();
        let s = sweep(&p, &[1.0, 2.0], &eps, &grid()).unwrap();
        let series = extract_series(&s, 3).unwrap();
        for ki in 0..2 {
            for n in 1..=3 {
                assert!(series.a_n(n)[ki].norm() <= 1e-9);
            }
            assert!((series.b_n(1)[ki] - 1.0).norm() <= 1e-9);
            assert!(series.b_n(2)[ki].norm() <= 1e-9);
            assert!(series.b_n(3)[ki].norm() <= 1e-9);
        }
    }

    #[test]
    fn extraction_matches_cascade_for_pure_q2() {
        let p = pure_q2(1.0);
        let g = grid();
        let eps: Vec<Complex64> = crate::forward::default_eps_list(0.08, 5);
        let k_grid = [0.8, 1.6];
        let s = sweep(&p, &k_grid, &eps, &g).unwrap();
        let extracted = extract_series(&s, 5).unwrap();
        for (ki, &k) in k_grid.iter().enumerate() {
            let state = solve_cascade(&p, c(k, 0.0), 3, &g).unwrap();
            let (a3, _) = state.ab(3);
            let rel = (extracted.a_n(3)[ki] - a3).norm() / a3.norm();
            assert!(rel <= 1e-4, "relative error {rel:e} at k = {k}");
            assert!(extracted.a_n(2)[ki].norm() <= 1e-6);
        }
    }

    #[test]
    fn duplicate_eps_values_are_rejected() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let eps = [c(0.1, 0.0), c(0.1, 0.0)];
        let s = sweep(&p, &[1.0], &[c(0.1, 0.0), c(0.2, 0.0)], &grid()).unwrap();
        let bad = ScatteringSweep {
            eps_list: eps.to_vec(),
            ..s
        };
        assert!(matches!(
            extract_series(&bad, 2),
            Err(Error::ContractViolation { .. })
        ));
    }
}
