use num_complex::Complex64;

use gnls_core::forward::{match_coefficients, solve_nonlinear};
use gnls_core::hierarchy::{forcing, jost_right, linear_scattering, solve_cascade};
use gnls_core::inversion::{
    build_system, find_xi0, invert_direct, invert_neumann, s_of_xi, DataRoute, DataSetDn,
    InversionGrid, OrderData, Regularizer, SystemConfig,
};
use gnls_core::numerics::{integrate_ivp, quad, Direction, SpatialGrid};
use gnls_core::potential::{CoefficientFunction, NonlinearPotential};

use crate::CliError;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, measured: f64, budget: f64) -> Check {
    Check {
        name,
        passed: measured <= budget,
        detail: format!("{measured:.3e} <= {budget:.1e}"),
    }
}

fn free_field() -> Check {
    let p = NonlinearPotential::zero(1.0).unwrap();
    let grid = SpatialGrid::default_for_width(1.0).unwrap();
    let eps = c(0.1, 0.0);
    let mut worst: f64 = 0.0;
    for k in [0.5, 2.0] {
        let traj = solve_nonlinear(&p, k, eps, &grid).unwrap();
        let (a, b) = match_coefficients(&traj, k).unwrap();
        worst = worst.max(a.norm()).max((b - eps).norm());
    }
    check("free-field A = 0, B = eps", worst, 1e-10)
}

fn wronskian_constancy() -> Check {
    let q0 = CoefficientFunction::constant(0.5, 1.0);
    let grid = SpatialGrid::default_for_width(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for k in [c(1.0, 0.0), c(0.8, 1.1)] {
        let jost = linear_scattering(&q0, k, &grid).unwrap();
        let reference = 2.0 * Complex64::i() * k * jost.b1;
        for index in [0, grid.len() / 2, grid.len() - 1] {
            let w = jost.v1.slope(index) * jost.u1.value(index)
                - jost.v1.value(index) * jost.u1.slope(index);
            worst = worst.max((w - reference).norm() / reference.norm());
        }
    }
    check("Wronskian identity 2ikB1 = W(v1, u1)", worst, 1e-8)
}

fn jost_bounds() -> Check {
    let b = 1.0;
    let q0 = CoefficientFunction::constant(0.3, b);
    let l1 = q0.l1_norm();
    let grid = SpatialGrid::default_for_width(b).unwrap();
    let mut worst_excess: f64 = 0.0;
    let amplitude_bound = (b * l1).exp();
    for k in [c(1.0, 0.0), c(0.0, 1.5), c(2.0, 1.0)] {
        let u1 = jost_right(&q0, k, &grid).unwrap();
        for (idx, x) in grid.nodes().enumerate() {
            let damped = ((Complex64::i() * k * x).exp() * u1.value(idx)).norm();
            worst_excess = worst_excess.max(damped - amplitude_bound);
        }
        // powered bound at n = 2
        if k.norm() >= 1.0 {
            let powered_bound = 3.0 / k.norm() * l1 * (b * 3.0 * l1).exp();
            for (idx, x) in grid.nodes().enumerate() {
                let deviation =
                    ((Complex64::i() * k * 3.0 * x).exp() * u1.value(idx).powu(3) - 1.0).norm();
                worst_excess = worst_excess.max(deviation - powered_bound);
            }
        }
    }
    check(
        "Jost amplitude and powered deviation bounds",
        worst_excess,
        1e-9,
    )
}

fn operator_norms() -> Check {
    let b: f64 = 1.0;
    let q0 = CoefficientFunction::constant(0.05, b);
    let potential = NonlinearPotential::new(b, vec![q0.clone()]).unwrap();
    let d = DataSetDn::new(2, b, OrderData::Synthetic { potential }, vec![q0.clone()]).unwrap();
    let xi0 = find_xi0(2, b, q0.l1_norm());
    let cfg = SystemConfig::new(32, InversionGrid::closed(b, 256).unwrap(), DataRoute::FData);
    let sys = build_system(&d, 2.0 * xi0, &cfg).unwrap();
    let k0_dev = (sys.diagnostics.k0_norm - b.sqrt()).abs() / b.sqrt();
    let inv_dev = (sys.diagnostics.k0_inv_norm - 1.0 / b.sqrt()).abs() * b.sqrt();
    let diff_excess = sys.diagnostics.k_minus_k0_norm - 1.05 * sys.diagnostics.s_xi.sqrt();
    let worst = k0_dev.max(inv_dev).max(diff_excess.max(0.0) + 0.0);
    Check {
        name: "operator norms |K0|, |K0^-1|, |K - K0|",
        passed: k0_dev <= 0.02 && inv_dev <= 0.02 && diff_excess <= 0.0,
        detail: format!("K0 dev {k0_dev:.2e}, synthesis dev {inv_dev:.2e}, worst {worst:.2e}"),
    }
}

fn resolvent_identity() -> Check {
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
    let grid = SpatialGrid::default_for_width(b).unwrap();
    let state = solve_cascade(&p, k, 2, &grid).unwrap();
    let jost = linear_scattering(p.q0(), k, &grid).unwrap();
    let (g2, _) = forcing(&p, &state, 2).unwrap();
    let resolvent = jost.resolvent_apply(&g2).unwrap();
    let ratio = state.ab(2).1 / jost.b1;
    let mut worst: f64 = 0.0;
    for (i, value) in resolvent.iter().enumerate() {
        let y2 = state.u(2).value(i) - ratio * jost.u1.value(i);
        worst = worst.max((y2 - value).norm());
    }
    check("resolvent identity y2 = -G g2", worst, 1e-5)
}

fn threshold_solver() -> Check {
    let xi0 = find_xi0(2, 1.0, 0.2);
    let root = (s_of_xi(xi0, 2, 1.0, 0.2).unwrap() - 1.0).abs();
    let mut monotone = true;
    let mut previous = f64::INFINITY;
    for i in 0..20 {
        let xi = 10f64.powf(-2.0 + 4.0 * i as f64 / 19.0);
        let s = s_of_xi(xi, 2, 1.0, 0.2).unwrap();
        monotone &= s < previous;
        previous = s;
    }
    Check {
        name: "threshold s(xi0) = b and monotone s",
        passed: root <= 1e-10 && monotone,
        detail: format!("|s(xi0) - b| = {root:.2e}, monotone = {monotone}"),
    }
}

fn inverter_agreement() -> Check {
    let b = 1.0;
    let q0 = CoefficientFunction::constant(0.05, b);
    let potential = NonlinearPotential::new(b, vec![q0.clone()]).unwrap();
    let d = DataSetDn::new(2, b, OrderData::Synthetic { potential }, vec![q0.clone()]).unwrap();
    let xi0 = find_xi0(2, b, q0.l1_norm());
    let m_max = 32;
    let cfg = SystemConfig::new(
        m_max,
        InversionGrid::periodic(b, 2 * m_max + 1).unwrap(),
        DataRoute::FData,
    );
    let mut sys = build_system(&d, 2.0 * xi0, &cfg).unwrap();
    let phi: Vec<Complex64> = sys
        .nodes
        .iter()
        .map(|&t| c(1.0 + 0.3 * (2.0 * std::f64::consts::PI * t).cos(), 0.0))
        .collect();
    sys.rhs = sys.apply_kernel(&phi);
    let neumann = invert_neumann(&sys, 60, 1e-13, false).unwrap();
    let direct = invert_direct(&sys, Regularizer::Identity).unwrap();
    let gap = neumann
        .phi
        .iter()
        .zip(&direct.phi)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    check("Neumann and direct inverters agree", gap, 1e-6)
}

fn convergence_orders() -> Check {
    let k = 3.0;
    let rk4_error = |panels: usize| -> f64 {
        let grid = SpatialGrid::new(1.0, panels).unwrap();
        let traj = integrate_ivp(
            |_x, u, _du| -c(k * k, 0.0) * u,
            c(1.0, 0.0),
            c(0.0, -k),
            &grid,
            Direction::Forward,
        )
        .unwrap();
        grid.nodes()
            .enumerate()
            .map(|(i, x)| (traj.value(i) - c(0.0, -k * x).exp()).norm())
            .fold(0.0, f64::max)
    };
    let rk4_factor = rk4_error(100) / rk4_error(200);
    let quad_error = |panels: usize| -> f64 {
        let grid = SpatialGrid::new(1.0, panels).unwrap();
        let samples: Vec<Complex64> = grid.nodes().map(|t| c(0.0, -2.0 * t).exp()).collect();
        let exact = (c(1.0, 0.0) - c(0.0, -2.0).exp()) / c(0.0, 2.0);
        (quad(&samples, &grid).unwrap() - exact).norm()
    };
    let quad_factor = quad_error(40) / quad_error(80);
    Check {
        name: "RK4 and Simpson refinement orders",
        passed: (12.0..=20.0).contains(&rk4_factor) && (12.0..=20.0).contains(&quad_factor),
        detail: format!("RK4 {rk4_factor:.2}, Simpson {quad_factor:.2} (target [12, 20])"),
    }
}

pub fn run(out_dir: Option<&std::path::Path>) -> Result<(), CliError> {
    let started = std::time::Instant::now();
    let checks = vec![
        free_field(),
        wronskian_constancy(),
        jost_bounds(),
        operator_norms(),
        resolvent_identity(),
        threshold_solver(),
        inverter_agreement(),
        convergence_orders(),
    ];

    let mut all_passed = true;
    println!("{:<48} {:<6} detail", "check", "status");
    for check in &checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        all_passed &= check.passed;
        println!("{:<48} {:<6} {}", check.name, status, check.detail);
    }
    println!("selfcheck finished in {:.2?}", started.elapsed());

    if let Some(out_dir) = out_dir {
        let mut manifest = crate::manifest::ManifestBuilder::new("selfcheck", "selfcheck");
        crate::io::write_file(out_dir, "selfcheck.csv", |w| {
            writeln!(w, "check,status,detail")?;
            for check in &checks {
                writeln!(
                    w,
                    "{},{},{}",
                    check.name,
                    if check.passed { "PASS" } else { "FAIL" },
                    check.detail
                )?;
            }
            Ok(())
        })?;
        manifest.add_output("selfcheck.csv");
        for check in &checks {
            manifest.add_diagnostic(format!(
                "{}: {}",
                check.name,
                if check.passed { "PASS" } else { "FAIL" }
            ));
        }
        manifest.write(out_dir)?;
    }

    if all_passed {
        Ok(())
    } else {
        Err(CliError::Numerical("selfcheck failed".to_string()))
    }
}
