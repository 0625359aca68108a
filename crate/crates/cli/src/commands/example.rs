use std::path::Path;

use num_complex::Complex64;

use gnls_core::hierarchy::solve_cascade;
use gnls_core::inversion::{
    fourier_invert_special, ConstantQ2, ExponentialQ2, OrderData, SpecialMethod, ThirdOrderSource,
};
use gnls_core::numerics::SpatialGrid;
use gnls_core::potential::{CoefficientFunction, NonlinearPotential};

use crate::io::write_file;
use crate::manifest::ManifestBuilder;
use crate::CliError;

const VALID_NAMES: &[&str] = &["constant_gamma", "exponential_alpha"];

struct ExampleCase {
    data: OrderData,
    potential: NonlinearPotential,
    truth: Box<dyn Fn(f64) -> f64>,
}

fn case(name: &str) -> Result<ExampleCase, CliError> {
    let b = 1.0;
    match name {
        "constant_gamma" => {
            let gamma = 1.0;
            Ok(ExampleCase {
                data: OrderData::ConstantQ2(ConstantQ2 { gamma, b }),
                potential: NonlinearPotential::single_term(
                    b,
                    2,
                    CoefficientFunction::constant(gamma, b),
                )
                .map_err(|e| CliError::Config(e.to_string()))?,
                truth: Box::new(move |_| gamma),
            })
        }
        "exponential_alpha" => {
            let alpha = 0.5;
            Ok(ExampleCase {
                data: OrderData::ExponentialQ2(ExponentialQ2 { alpha, b }),
                potential: NonlinearPotential::single_term(
                    b,
                    2,
                    CoefficientFunction::exponential(alpha, b),
                )
                .map_err(|e| CliError::Config(e.to_string()))?,
                truth: Box::new(move |x| (alpha * x).exp()),
            })
        }
        other => Err(CliError::Config(format!(
            "unknown example {other:?}; valid names: {}",
            VALID_NAMES.join(", ")
        ))),
    }
}

pub fn run(name: &str, out_dir: &Path) -> Result<(), CliError> {
    let example = case(name)?;
    let mut manifest = ManifestBuilder::new("example", name);

    manifest.start_stage("third_order_curves");
    let b = 1.0;
    let grid = SpatialGrid::default_for_width(b).map_err(|e| CliError::Config(e.to_string()))?;
    let k_values: Vec<f64> = (0..60).map(|i| 0.5 + 7.5 * i as f64 / 59.0).collect();

    let closed_ab = |k: Complex64| -> (Complex64, Complex64) {
        match &example.data {
            OrderData::ConstantQ2(d) => (d.a3(k), d.b3(k)),
            OrderData::ExponentialQ2(d) => (d.a3(k), d.b3(k)),
            _ => unreachable!(),
        }
    };

    let mut max_cascade_dev: f64 = 0.0;
    let mut max_relation_dev: f64 = 0.0;
    write_file(out_dir, "third_order.csv", |w| {
        writeln!(
            w,
            "k,re_a3,im_a3,re_b3,im_b3,re_a3_cascade,im_a3_cascade,re_b3_cascade,im_b3_cascade,abs_a3_dev,abs_b3_dev,relation_residual"
        )?;
        for &k in &k_values {
            let kc = Complex64::new(k, 0.0);
            let (a3, b3) = closed_ab(kc);
            let state = solve_cascade(&example.potential, kc, 3, &grid)
                .map_err(|e| std::io::Error::other(e.to_string()))?;
            let (a3c, b3c) = state.ab(3);
            let (_, b3_2k) = closed_ab(Complex64::new(2.0 * k, 0.0));
            let relation = (a3 + 2.0 * b3_2k).norm();
            let a_dev = (a3 - a3c).norm();
            let b_dev = (b3 - b3c).norm();
            max_cascade_dev = max_cascade_dev.max(a_dev).max(b_dev);
            max_relation_dev = max_relation_dev.max(relation);
            writeln!(
                w,
                "{k:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{a_dev:.16e},{b_dev:.16e},{relation:.16e}",
                a3.re, a3.im, b3.re, b3.im, a3c.re, a3c.im, b3c.re, b3c.im
            )?;
        }
        Ok(())
    })?;
    manifest.add_output("third_order.csv");
    manifest.add_diagnostic(format!("max |closed - cascade| = {max_cascade_dev:.3e}"));
    manifest.add_diagnostic(format!("max |A3(k) + 2 B3(2k)| = {max_relation_dev:.3e}"));
    println!("third-order curves: max |closed - cascade| = {max_cascade_dev:.3e}, relation residual = {max_relation_dev:.3e}");

    manifest.start_stage("reconstructions");
    let x_grid = SpatialGrid::new(b, 400).map_err(|e| CliError::Config(e.to_string()))?;
    let continuous = fourier_invert_special(
        &example.data,
        ThirdOrderSource::A3,
        SpecialMethod::ContinuousQuad {
            k_cutoff: 200.0,
            panels: None,
        },
        &x_grid,
    )?;
    let discrete = fourier_invert_special(
        &example.data,
        ThirdOrderSource::A3,
        SpecialMethod::DiscreteSum {
            xi: 0.05,
            m_max: 128,
        },
        &x_grid,
    )?;

    let mut interior_continuous: f64 = 0.0;
    let mut interior_routes: f64 = 0.0;
    write_file(out_dir, "reconstruction_routes.csv", |w| {
        writeln!(
            w,
            "x,q2_true,q2_integral_route,q2_mode_sum_route,route_difference"
        )?;
        for (i, x) in x_grid.nodes().enumerate() {
            let truth = (example.truth)(x);
            let diff = (continuous.q[i] - discrete.q[i]).abs();
            if (0.05..=0.95).contains(&x) {
                interior_continuous = interior_continuous.max((continuous.q[i] - truth).abs());
                interior_routes = interior_routes.max(diff);
            }
            writeln!(
                w,
                "{x:.16e},{truth:.16e},{:.16e},{:.16e},{diff:.16e}",
                continuous.q[i], discrete.q[i]
            )?;
        }
        Ok(())
    })?;
    manifest.add_output("reconstruction_routes.csv");
    manifest.add_diagnostic(format!(
        "interior max |integral-route - truth| = {interior_continuous:.3e}"
    ));
    manifest.add_diagnostic(format!(
        "interior max route difference = {interior_routes:.3e}"
    ));
    println!(
        "reconstructions: interior error {interior_continuous:.3e}, route difference {interior_routes:.3e}"
    );

    manifest.write(out_dir)
}
