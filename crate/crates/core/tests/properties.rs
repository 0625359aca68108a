//! Property tests for the structural invariants of the potential series and
//! the plane-wave algebra.

use num_complex::Complex64;
use proptest::prelude::*;

use gnls_core::hierarchy::extract_ab;
use gnls_core::potential::{CoefficientFunction, NonlinearPotential};

prop_compose! {
    fn arbitrary_potential()(
        b in 0.5f64..3.0,
        gamma0 in -2.0f64..2.0,
        amp1 in -1.5f64..1.5,
        wave1 in 0.5f64..8.0,
        rate2 in -1.0f64..1.0,
    ) -> NonlinearPotential {
        NonlinearPotential::new(
            b,
            vec![
                CoefficientFunction::constant(gamma0, b),
                CoefficientFunction::sinusoid(amp1, wave1, b),
                CoefficientFunction::exponential(rate2, b),
            ],
        )
        .unwrap()
    }
}

proptest! {
    #[test]
    fn potential_vanishes_outside_its_support(
        p in arbitrary_potential(),
        offset in 1e-9f64..50.0,
        u_re in -3.0f64..3.0,
        u_im in -3.0f64..3.0,
    ) {
        let u = Complex64::new(u_re, u_im);
        let beyond = p.support_width() + offset;
        prop_assert_eq!(p.eval_q(beyond, u), Complex64::new(0.0, 0.0));
        prop_assert_eq!(p.eval_q(-offset, u), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn potential_is_real_for_real_amplitude(
        p in arbitrary_potential(),
        x in 0.0f64..0.5,
        u in -3.0f64..3.0,
    ) {
        let value = p.eval_q(x, Complex64::new(u, 0.0));
        prop_assert_eq!(value.im, 0.0);
    }

    #[test]
    fn enlarging_a_coefficient_never_increases_delta(
        p in arbitrary_potential(),
        scale in 1.0f64..4.0,
        r in 0.2f64..2.0,
    ) {
        let b = p.support_width();
        let enlarged = NonlinearPotential::new(
            b,
            p.coefficients()
                .iter()
                .map(|c| scale_coefficient(c, scale, b))
                .collect(),
        )
        .unwrap();
        let base = p.epsilon_bound(r).unwrap();
        let bigger = enlarged.epsilon_bound(r).unwrap();
        prop_assert!(bigger.delta <= base.delta + 1e-15);
    }

    #[test]
    fn plane_wave_split_reassembles_the_endpoint(
        k_re in 0.1f64..5.0,
        k_im in 0.0f64..2.0,
        b in 0.5f64..2.0,
        v_re in -2.0f64..2.0,
        v_im in -2.0f64..2.0,
        s_re in -2.0f64..2.0,
        s_im in -2.0f64..2.0,
    ) {
        let k = Complex64::new(k_re, k_im);
        let value = Complex64::new(v_re, v_im);
        let slope = Complex64::new(s_re, s_im);
        let (a, bb) = extract_ab(value, slope, k, b).unwrap();
        let i = Complex64::i();
        let reassembled = a * (i * k * b).exp() + bb * (-i * k * b).exp();
        let slope_back = i * k * (a * (i * k * b).exp() - bb * (-i * k * b).exp());
        prop_assert!((reassembled - value).norm() <= 1e-10 * (1.0 + value.norm()));
        prop_assert!((slope_back - slope).norm() <= 1e-10 * (1.0 + slope.norm()));
    }

    #[test]
    fn sup_bound_dominates_sampled_values(
        p in arbitrary_potential(),
        x in 0.0f64..3.0,
        r in 0.2f64..2.0,
        angle in 0.0f64..std::f64::consts::TAU,
        radius in 0.0f64..1.0,
    ) {
        let u = Complex64::from_polar(r * radius, angle);
        let c_bound = p.sup_bound(r).unwrap();
        prop_assert!(p.eval_q(x, u).norm() <= c_bound + 1e-12);
    }
}

fn scale_coefficient(c: &CoefficientFunction, scale: f64, b: f64) -> CoefficientFunction {
    use gnls_core::potential::CoefficientKind;
    match c.kind() {
        CoefficientKind::Zero => CoefficientFunction::zero(b),
        CoefficientKind::Constant { value } => CoefficientFunction::constant(value * scale, b),
        CoefficientKind::Exponential { rate } => {
            // enlarge pointwise by raising the positive rate
            CoefficientFunction::exponential(rate.max(0.0) * scale.max(1.0), b)
        }
        CoefficientKind::Sinusoid {
            amplitude,
            wavenumber,
        } => CoefficientFunction::sinusoid(amplitude * scale, *wavenumber, b),
        CoefficientKind::Tabulated { .. } => c.clone(),
    }
}
