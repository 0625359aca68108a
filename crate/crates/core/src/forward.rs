//! The full nonlinear scattering problem: integrate
//! `u'' = (Q(x, u) - k^2) u` with `u(0) = eps`, `u'(0) = -ik eps`, match
//! plane waves at `x = b` to produce `A(k; eps)` and `B(k; eps)`, and verify
//! with an independent Picard iteration of the equivalent integral equation.
//!
//! Outside the support the solution continues analytically: `eps e^{-ikx}`
//! for `x <= 0` and `A e^{ikx} + B e^{-ikx}` for `x >= b`, so integration is
//! confined to `[0, b]`.

use std::io::{BufWriter, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{cumquad, integrate_ivp, ComplexTrajectory, Direction, SpatialGrid};
use crate::potential::NonlinearPotential;

/// Scattering coefficients for one `(k, eps)` pair: `outgoing` multiplies
/// `e^{ikx}` and `incoming` multiplies `e^{-ikx}` for `x >= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveMatch {
    pub k: f64,
    pub epsilon: Complex64,
    pub outgoing: Complex64,
    pub incoming: Complex64,
}

/// Sampled `A(k; eps)`, `B(k; eps)` over a real-k grid and an eps list,
/// stored k-major so `entry(ki, ei)` indexes deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSweep {
    pub k_grid: Vec<f64>,
    pub eps_list: Vec<Complex64>,
    pub entries: Vec<PlaneWaveMatch>,
    /// Provenance fingerprint of the generating potential.
    pub support_width: f64,
    pub degree: usize,
}

impl ScatteringSweep {
    pub fn entry(&self, k_index: usize, eps_index: usize) -> &PlaneWaveMatch {
        &self.entries[k_index * self.eps_list.len() + eps_index]
    }

    /// Delimited text table with header row; full double precision so
    /// round-trips are bit-exact.
    pub fn write_table<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut out = BufWriter::new(writer);
        writeln!(out, "k,re_eps,im_eps,re_a,im_a,re_b,im_b")?;
        for e in &self.entries {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                e.k,
                e.epsilon.re,
                e.epsilon.im,
                e.outgoing.re,
                e.outgoing.im,
                e.incoming.re,
                e.incoming.im
            )?;
        }
        out.flush()
    }

    /// Parses a table produced by [`ScatteringSweep::write_table`]. The
    /// provenance fingerprint is not stored in the table and is restored as
    /// unknown (`support_width = 0`, `degree = 0`).
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::contract("ScatteringSweep::parse_table", "empty table"))?;
        if header.trim() != "k,re_eps,im_eps,re_a,im_a,re_b,im_b" {
            return Err(Error::contract(
                "ScatteringSweep::parse_table",
                format!("unexpected header at line 1: {header:?}"),
            ));
        }
        let mut entries = Vec::new();
        for (index, line) in lines {
            let line_no = index + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(Error::contract(
                    "ScatteringSweep::parse_table",
                    format!("line {line_no}: expected 7 fields, found {}", fields.len()),
                ));
            }
            let mut values = [0.0_f64; 7];
            for (slot, field) in values.iter_mut().zip(&fields) {
                *slot = field.trim().parse::<f64>().map_err(|e| {
                    Error::contract(
                        "ScatteringSweep::parse_table",
                        format!("line {line_no}: {e} in field {field:?}"),
                    )
                })?;
            }
            entries.push(PlaneWaveMatch {
                k: values[0],
                epsilon: Complex64::new(values[1], values[2]),
                outgoing: Complex64::new(values[3], values[4]),
                incoming: Complex64::new(values[5], values[6]),
            });
        }
        let mut k_grid: Vec<f64> = Vec::new();
        for e in &entries {
            if k_grid.last() != Some(&e.k) && !k_grid.contains(&e.k) {
                k_grid.push(e.k);
            }
        }
        let eps_count = if k_grid.is_empty() {
            0
        } else {
            entries.len() / k_grid.len()
        };
        if eps_count == 0 || k_grid.len() * eps_count != entries.len() {
            return Err(Error::contract(
                "ScatteringSweep::parse_table",
                format!(
                    "table is not complete: {} entries over {} k values",
                    entries.len(),
                    k_grid.len()
                ),
            ));
        }
        let eps_list: Vec<Complex64> = entries[..eps_count].iter().map(|e| e.epsilon).collect();
        Ok(Self {
            k_grid,
            eps_list,
            entries,
            support_width: 0.0,
            degree: 0,
        })
    }
}

fn check_forward_inputs(p: &NonlinearPotential, k: f64, grid: &SpatialGrid) -> Result<()> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::ZeroWavenumber);
    }
    if (grid.width() - p.support_width()).abs() > 1e-12 * p.support_width() {
        return Err(Error::contract(
            "forward solve",
            format!(
                "grid width {} does not match potential support {}",
                grid.width(),
                p.support_width()
            ),
        ));
    }
    Ok(())
}

/// Integrates the nonlinear equation on `[0, b]` from the incident-wave
/// initial data `u(0) = eps`, `u'(0) = -ik eps`.
pub fn solve_nonlinear(
    p: &NonlinearPotential,
    k: f64,
    epsilon: Complex64,
    grid: &SpatialGrid,
) -> Result<ComplexTrajectory> {
    check_forward_inputs(p, k, grid)?;
    let k2 = Complex64::new(k * k, 0.0);
    integrate_ivp(
        |x, u, _du| (p.eval_q(x, u) - k2) * u,
        epsilon,
        Complex64::new(0.0, -k) * epsilon,
        grid,
        Direction::Forward,
    )
}

/// Reads `A`, `B` off the trajectory endpoint:
/// `A = e^{-ikb} (k u(b) - i u'(b)) / (2k)`,
/// `B = e^{ikb} (k u(b) + i u'(b)) / (2k)`.
pub fn match_coefficients(traj: &ComplexTrajectory, k: f64) -> Result<(Complex64, Complex64)> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::ZeroWavenumber);
    }
    let b = traj.grid().width();
    let u = traj.end_value();
    let du = traj.end_slope();
    let i = Complex64::i();
    let outgoing = (-i * k * b).exp() * (u * k - i * du) / (2.0 * k);
    let incoming = (i * k * b).exp() * (u * k + i * du) / (2.0 * k);
    Ok((outgoing, incoming))
}

/// Picard iteration of the integral form
/// `u = eps e^{-ikx} + (1/k) int_0^x sin(k(x-t)) Q(t, u) u dt`,
/// an oracle independent of the RK4 path. The slope follows from
/// differentiating under the integral:
/// `u' = -ik eps e^{-ikx} + int_0^x cos(k(x-t)) Q u dt`.
pub fn volterra_oracle(
    p: &NonlinearPotential,
    k: f64,
    epsilon: Complex64,
    grid: &SpatialGrid,
    max_iter: usize,
    tol: f64,
) -> Result<ComplexTrajectory> {
    check_forward_inputs(p, k, grid)?;
    let n = grid.len();
    let xs: Vec<f64> = grid.nodes().collect();
    let incident: Vec<Complex64> = xs
        .iter()
        .map(|&x| epsilon * Complex64::new(0.0, -k * x).exp())
        .collect();

    let cos_kt: Vec<f64> = xs.iter().map(|&x| (k * x).cos()).collect();
    let sin_kt: Vec<f64> = xs.iter().map(|&x| (k * x).sin()).collect();

    let mut u = incident.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        // w = Q(t, u) u
        let w: Vec<Complex64> = xs
            .iter()
            .zip(&u)
            .map(|(&t, &ut)| p.eval_q(t, ut) * ut)
            .collect();
        let cos_w: Vec<Complex64> = w.iter().zip(&cos_kt).map(|(wi, &c)| wi * c).collect();
        let sin_w: Vec<Complex64> = w.iter().zip(&sin_kt).map(|(wi, &s)| wi * s).collect();
        let cum_cos = cumquad(&cos_w, grid)?;
        let cum_sin = cumquad(&sin_w, grid)?;

        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            // sin(k(x - t)) = sin(kx) cos(kt) - cos(kx) sin(kt)
            let kernel_int = sin_kt[i] * cum_cos[i] - cos_kt[i] * cum_sin[i];
            next.push(incident[i] + kernel_int / k);
        }
        residual = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        u = next;
        if !residual.is_finite() {
            return Err(Error::PicardDidNotConverge {
                iterations: max_iter,
                residual,
            });
        }
        if residual <= tol {
            let w: Vec<Complex64> = xs
                .iter()
                .zip(&u)
                .map(|(&t, &ut)| p.eval_q(t, ut) * ut)
                .collect();
            let cos_w: Vec<Complex64> = w.iter().zip(&cos_kt).map(|(wi, &c)| wi * c).collect();
            let sin_w: Vec<Complex64> = w.iter().zip(&sin_kt).map(|(wi, &s)| wi * s).collect();
            let cum_cos = cumquad(&cos_w, grid)?;
            let cum_sin = cumquad(&sin_w, grid)?;
            let mut slopes = Vec::with_capacity(n);
            for i in 0..n {
                // cos(k(x - t)) = cos(kx) cos(kt) + sin(kx) sin(kt)
                let kernel_int = cos_kt[i] * cum_cos[i] + sin_kt[i] * cum_sin[i];
                slopes.push(Complex64::new(0.0, -k) * incident[i] + kernel_int);
            }
            return ComplexTrajectory::new(grid.clone(), u, slopes);
        }
    }
    Err(Error::PicardDidNotConverge {
        iterations: max_iter,
        residual,
    })
}

/// Solves and matches every `(k, eps)` pair. Entries are computed
/// independently (in parallel) and assembled k-major, so the result is
/// deterministic regardless of scheduling.
pub fn sweep(
    p: &NonlinearPotential,
    k_grid: &[f64],
    eps_list: &[Complex64],
    grid: &SpatialGrid,
) -> Result<ScatteringSweep> {
    if k_grid.iter().any(|k| *k == 0.0 || !k.is_finite()) {
        return Err(Error::contract("sweep", "k grid must exclude 0"));
    }
    if eps_list.iter().any(|e| e.norm() == 0.0) {
        return Err(Error::contract("sweep", "eps_list entries must be nonzero"));
    }
    for (i, e) in eps_list.iter().enumerate() {
        if eps_list[..i].contains(e) {
            return Err(Error::contract(
                "sweep",
                "eps_list entries must be distinct",
            ));
        }
    }
    let pairs: Vec<(f64, Complex64)> = k_grid
        .iter()
        .flat_map(|&k| eps_list.iter().map(move |&e| (k, e)))
        .collect();
    let entries: Result<Vec<PlaneWaveMatch>> = pairs
        .par_iter()
        .map(|&(k, epsilon)| {
            let traj = solve_nonlinear(p, k, epsilon, grid).map_err(|e| Error::SweepEntry {
                k,
                eps: format!("{epsilon}"),
                source: Box::new(e),
            })?;
            let (outgoing, incoming) =
                match_coefficients(&traj, k).map_err(|e| Error::SweepEntry {
                    k,
                    eps: format!("{epsilon}"),
                    source: Box::new(e),
                })?;
            Ok(PlaneWaveMatch {
                k,
                epsilon,
                outgoing,
                incoming,
            })
        })
        .collect();
    Ok(ScatteringSweep {
        k_grid: k_grid.to_vec(),
        eps_list: eps_list.to_vec(),
        entries: entries?,
        support_width: p.support_width(),
        degree: p.degree(),
    })
}

/// Logarithmically spaced amplitudes in `[delta/50, delta/5]`, the default
/// eps list for synthetic experiments.
pub fn default_eps_list(delta: f64, count: usize) -> Vec<Complex64> {
    let lo = (delta / 50.0).ln();
    let hi = (delta / 5.0).ln();
    (0..count)
        .map(|i| {
            let t = if count == 1 {
                0.5
            } else {
                i as f64 / (count - 1) as f64
            };
            Complex64::new((lo + t * (hi - lo)).exp(), 0.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::CoefficientFunction;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pure_q2(gamma: f64, b: f64) -> NonlinearPotential {
        NonlinearPotential::single_term(b, 2, CoefficientFunction::constant(gamma, b)).unwrap()
    }

    fn grid() -> SpatialGrid {
        SpatialGrid::new(1.0, 2000).unwrap()
    }

    #[test]
    fn zero_potential_solution_is_free_wave() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let k = 1.7;
        let eps = c(0.1, 0.0);
        let traj = solve_nonlinear(&p, k, eps, &grid()).unwrap();
        let mut max_err: f64 = 0.0;
        for (i, x) in traj.grid().nodes().enumerate() {
            let exact = eps * c(0.0, -k * x).exp();
            max_err = max_err.max((traj.value(i) - exact).norm());
        }
        assert!(max_err <= 1e-9, "max error {max_err:e}");
    }

    /// Third-order correction for the pure-q2 potential by variation of
    /// parameters:
    /// `u3(x) = (1/2ik) e^{ikx} int_0^x q2 e^{-4ikt} dt
    ///        - (1/2ik) e^{-ikx} int_0^x q2 e^{-2ikt} dt`.
    fn u3_constant_gamma(gamma: f64, k: f64, x: f64) -> Complex64 {
        let i = Complex64::i();
        let int1 = (1.0 - (-4.0 * i * k * x).exp()) / (4.0 * i * k);
        let int2 = (1.0 - (-2.0 * i * k * x).exp()) / (2.0 * i * k);
        ((i * k * x).exp() * int1 - (-i * k * x).exp() * int2) * gamma / (2.0 * i * k)
    }

    #[test]
    fn small_amplitude_solution_matches_third_order_expansion() {
        let gamma = 1.0;
        let k = 1.0;
        let eps = 0.1;
        let p = pure_q2(gamma, 1.0);
        let traj = solve_nonlinear(&p, k, c(eps, 0.0), &grid()).unwrap();
        let mut max_dev: f64 = 0.0;
        for (idx, x) in traj.grid().nodes().enumerate() {
            let expansion =
                c(eps, 0.0) * c(0.0, -k * x).exp() + u3_constant_gamma(gamma, k, x) * eps.powi(3);
            max_dev = max_dev.max((traj.value(idx) - expansion).norm());
        }
        let tol = 10.0 * eps.powi(5);
        assert!(max_dev <= tol, "deviation {max_dev:e} exceeds {tol:e}");
    }

    #[test]
    fn odd_nonlinearity_gives_odd_solution() {
        let p = pure_q2(1.0, 1.0);
        let g = grid();
        let plus = solve_nonlinear(&p, 1.0, c(0.1, 0.0), &g).unwrap();
        let minus = solve_nonlinear(&p, 1.0, c(-0.1, 0.0), &g).unwrap();
        let mut max_dev: f64 = 0.0;
        for i in 0..plus.len() {
            max_dev = max_dev.max((plus.value(i) + minus.value(i)).norm());
        }
        assert!(max_dev <= 1e-12, "odd symmetry violated by {max_dev:e}");
    }

    #[test]
    fn matching_pure_incoming_and_outgoing_waves() {
        let g = SpatialGrid::new(1.0, 4).unwrap();
        let k = 2.0;
        let i = Complex64::i();
        let b = g.width();
        // endpoint-only data matters for matching
        let make = |val: Complex64, slope: Complex64| {
            let mut values = vec![c(0.0, 0.0); g.len()];
            let mut slopes = vec![c(0.0, 0.0); g.len()];
            *values.last_mut().unwrap() = val;
            *slopes.last_mut().unwrap() = slope;
            ComplexTrajectory::new(g.clone(), values, slopes).unwrap()
        };
        let incoming = make((-i * k * b).exp(), -i * k * (-i * k * b).exp());
        let (a, bb) = match_coefficients(&incoming, k).unwrap();
        assert!(a.norm() <= 1e-14);
        assert!((bb - 1.0).norm() <= 1e-14);

        let outgoing = make((i * k * b).exp(), i * k * (i * k * b).exp());
        let (a, bb) = match_coefficients(&outgoing, k).unwrap();
        assert!((a - 1.0).norm() <= 1e-14);
        assert!(bb.norm() <= 1e-14);
    }

    #[test]
    fn zero_potential_scatters_trivially() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let eps = c(0.1, 0.0);
        let traj = solve_nonlinear(&p, 2.0, eps, &grid()).unwrap();
        let (a, b) = match_coefficients(&traj, 2.0).unwrap();
        assert!(a.norm() <= 1e-10);
        assert!((b - eps).norm() <= 1e-10);
    }

    #[test]
    fn zero_wavenumber_is_rejected() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        assert!(matches!(
            solve_nonlinear(&p, 0.0, c(0.1, 0.0), &grid()),
            Err(Error::ZeroWavenumber)
        ));
    }

    #[test]
    fn volterra_zero_potential_converges_immediately() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let traj = volterra_oracle(&p, 1.0, c(0.1, 0.0), &grid(), 3, 1e-13).unwrap();
        let mut max_err: f64 = 0.0;
        for (i, x) in traj.grid().nodes().enumerate() {
            let exact = c(0.1, 0.0) * c(0.0, -x).exp();
            max_err = max_err.max((traj.value(i) - exact).norm());
        }
        assert!(max_err <= 1e-12);
    }

    #[test]
    fn volterra_agrees_with_rk4() {
        let p = pure_q2(1.0, 1.0);
        let g = grid();
        let rk4 = solve_nonlinear(&p, 1.0, c(0.1, 0.0), &g).unwrap();
        let picard = volterra_oracle(&p, 1.0, c(0.1, 0.0), &g, 50, 1e-12).unwrap();
        let mut max_dev: f64 = 0.0;
        for i in 0..g.len() {
            max_dev = max_dev.max((rk4.value(i) - picard.value(i)).norm());
        }
        assert!(max_dev <= 1e-8, "cross-method deviation {max_dev:e}");
        let slope_dev = (rk4.end_slope() - picard.end_slope()).norm();
        assert!(slope_dev <= 1e-7, "slope deviation {slope_dev:e}");
    }

    #[test]
    fn volterra_zero_amplitude_gives_zero_trajectory() {
        let p = pure_q2(1.0, 1.0);
        let traj = volterra_oracle(&p, 1.0, c(0.0, 0.0), &grid(), 3, 1e-13).unwrap();
        assert_eq!(traj.sup_norm(), 0.0);
    }

    #[test]
    fn sweep_zero_potential_has_trivial_table() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let eps = [c(0.05, 0.0), c(0.1, 0.0)];
        let s = sweep(&p, &[0.5, 1.0, 2.0], &eps, &grid()).unwrap();
        assert_eq!(s.entries.len(), 6);
        for ki in 0..3 {
            for ei in 0..2 {
                let e = s.entry(ki, ei);
                assert!(e.outgoing.norm() <= 1e-10);
                assert!((e.incoming - e.epsilon).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn sweep_third_order_term_matches_closed_form() {
        // B(k; eps) - eps ~ eps^3 B3 with B3 = (gamma / 4k^2)(1 - e^{-2ikb})
        let gamma = 1.0;
        let p = pure_q2(gamma, 1.0);
        let k = 1.3;
        let eps = 0.05;
        let s = sweep(&p, &[k], &[c(eps, 0.0)], &grid()).unwrap();
        let b3 = (1.0 - c(0.0, -2.0 * k).exp()) * gamma / (4.0 * k * k);
        let measured = s.entry(0, 0).incoming - eps;
        assert!(
            (measured - b3 * eps.powi(3)).norm() <= 10.0 * eps.powi(5),
            "third-order mismatch"
        );
    }

    #[test]
    fn sweep_single_pair_has_one_entry() {
        let p = NonlinearPotential::zero(1.0).unwrap();
        let s = sweep(&p, &[1.0], &[c(0.1, 0.0)], &grid()).unwrap();
        assert_eq!(s.entries.len(), 1);
    }

    #[test]
    fn doubling_eps_changes_solution_at_third_order() {
        let p = pure_q2(1.0, 1.0);
        let g = grid();
        let eps = 0.02;
        let one = solve_nonlinear(&p, 1.0, c(eps, 0.0), &g).unwrap();
        let two = solve_nonlinear(&p, 1.0, c(2.0 * eps, 0.0), &g).unwrap();
        let mut max_dev: f64 = 0.0;
        for i in 0..g.len() {
            max_dev = max_dev.max((two.value(i) - one.value(i) * 2.0).norm());
        }
        // deviation is dominated by (2^3 - 2) eps^3 |u3|
        assert!(max_dev >= 1e-7, "nonlinearity should be visible");
        assert!(max_dev <= 50.0 * eps.powi(3), "deviation {max_dev:e}");
    }

    #[test]
    fn sweep_errors_are_tagged_with_the_pair() {
        // an amplitude far beyond the existence bound blows the solve up
        let p = pure_q2(50.0, 1.0);
        let result = sweep(&p, &[1.0], &[c(80.0, 0.0)], &grid());
        match result {
            Err(Error::SweepEntry { k, .. }) => assert_eq!(k, 1.0),
            other => panic!("expected a tagged sweep error, got {other:?}"),
        }
    }

    #[test]
    fn table_round_trip_is_exact() {
        let p = pure_q2(0.7, 1.0);
        let s = sweep(&p, &[0.9, 1.7], &[c(0.03, 0.0), c(0.06, 0.0)], &grid()).unwrap();
        let mut buffer = Vec::new();
        s.write_table(&mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let parsed = ScatteringSweep::parse_table(&text).unwrap();
        assert_eq!(parsed.k_grid, s.k_grid);
        assert_eq!(parsed.eps_list, s.eps_list);
        assert_eq!(parsed.entries, s.entries);
    }

    #[test]
    fn truncated_table_reports_line_number() {
        let text = "k,re_eps,im_eps,re_a,im_a,re_b,im_b\n1.0,0.1,0.0,0.0\n";
        match ScatteringSweep::parse_table(text) {
            Err(Error::ContractViolation { reason, .. }) => {
                assert!(reason.contains("line 2"), "reason: {reason}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
