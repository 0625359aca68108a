use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::inversion::data::OrderData;
use crate::numerics::{quad, SpatialGrid};

/// Which third-order coefficient drives the special recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThirdOrderSource {
    A3,
    B3,
}

/// Discretization of the special pure-`q2` inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialMethod {
    /// Real-axis Fourier integral
    /// `q2(x) = (4i/pi) int kA3 e^{4ikx} dk = -(2i/pi) int kB3 e^{2ikx} dk`
    /// truncated to `[-k_cutoff, k_cutoff]`.
    ContinuousQuad {
        k_cutoff: f64,
        panels: Option<usize>,
    },
    /// Shifted-contour mode sum, the discrete counterpart evaluated at
    /// `k_m = 2 pi m / (nu b) + i xi`.
    DiscreteSum { xi: f64, m_max: usize },
}

/// Reconstruction output of the special routes.
#[derive(Debug, Clone)]
pub struct SpecialReconstruction {
    pub q: Vec<f64>,
    pub imag_residual: f64,
}

/// Direct recovery of `q2` when `q0 = q1 = 0`, from third-order data alone.
///
/// Applicable only to the pure-`q2` case; the general contour machinery in
/// [`crate::inversion::recover_q`] handles everything else.
pub fn fourier_invert_special(
    data: &OrderData,
    source: ThirdOrderSource,
    method: SpecialMethod,
    grid: &SpatialGrid,
) -> Result<SpecialReconstruction> {
    match method {
        SpecialMethod::ContinuousQuad { k_cutoff, panels } => {
            continuous_route(data, source, k_cutoff, panels, grid)
        }
        SpecialMethod::DiscreteSum { xi, m_max } => discrete_route(data, source, xi, m_max, grid),
    }
}

fn realify(raw: Vec<Complex64>) -> SpecialReconstruction {
    let imag_residual = raw.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    SpecialReconstruction {
        q: raw.into_iter().map(|v| v.re).collect(),
        imag_residual,
    }
}

fn continuous_route(
    data: &OrderData,
    source: ThirdOrderSource,
    k_cutoff: f64,
    panels: Option<usize>,
    grid: &SpatialGrid,
) -> Result<SpecialReconstruction> {
    if !(k_cutoff.is_finite() && k_cutoff > 0.0) {
        return Err(Error::contract(
            "fourier_invert_special",
            format!("k_cutoff must be positive, got {k_cutoff}"),
        ));
    }
    let b = grid.width();
    // sample at least ~25 points per oscillation of e^{i nu k x} over the
    // integration range
    let default_panels = {
        let nu = match source {
            ThirdOrderSource::A3 => 4.0,
            ThirdOrderSource::B3 => 2.0,
        };
        let per_period = 2.0 * std::f64::consts::PI / (nu * b);
        ((2.0 * k_cutoff / per_period) * 25.0).ceil() as usize
    };
    let mut n_panels = panels.unwrap_or(default_panels.max(4000));
    if !n_panels.is_multiple_of(2) {
        n_panels += 1;
    }

    let k_grid = SpatialGrid::new(2.0 * k_cutoff, n_panels)?;
    // tabulate k * coefficient once over the k-line
    let samples: Vec<Complex64> = k_grid
        .nodes()
        .map(|s| {
            let k = Complex64::new(s - k_cutoff, 0.0);
            match source {
                ThirdOrderSource::A3 => data.eval_k_ab(3, k, grid).map(|(ka, _)| ka),
                ThirdOrderSource::B3 => data.eval_k_ab(3, k, grid).map(|(_, kb)| kb),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let i = Complex64::i();
    let prefactor = match source {
        ThirdOrderSource::A3 => 4.0 * i / std::f64::consts::PI,
        ThirdOrderSource::B3 => -2.0 * i / std::f64::consts::PI,
    };
    let phase_rate = match source {
        ThirdOrderSource::A3 => 4.0,
        ThirdOrderSource::B3 => 2.0,
    };

    let raw: Vec<Complex64> = grid
        .nodes()
        .map(|x| {
            let integrand: Vec<Complex64> = k_grid
                .nodes()
                .zip(&samples)
                .map(|(s, &ka)| {
                    let k = s - k_cutoff;
                    ka * Complex64::new(0.0, phase_rate * k * x).exp()
                })
                .collect();
            quad(&integrand, &k_grid).map(|v| v * prefactor)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(realify(raw))
}

fn discrete_route(
    data: &OrderData,
    source: ThirdOrderSource,
    xi: f64,
    m_max: usize,
    grid: &SpatialGrid,
) -> Result<SpecialReconstruction> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::NonPositiveXi { xi });
    }
    let b = grid.width();
    // A3 drives the F route (envelope n+1 = 4); B3 drives the E route
    // (envelope n-1 = 2)
    let nu = match source {
        ThirdOrderSource::A3 => 4.0,
        ThirdOrderSource::B3 => 2.0,
    };
    let i = Complex64::i();

    let mut p = Vec::with_capacity(2 * m_max + 1);
    for m in -(m_max as i64)..=(m_max as i64) {
        let k = Complex64::new(2.0 * std::f64::consts::PI * m as f64 / (nu * b), xi);
        let (ka, kb) = data.eval_k_ab(3, k, grid)?;
        let value = match source {
            ThirdOrderSource::A3 => 2.0 * i * ka,
            ThirdOrderSource::B3 => -2.0 * i * kb,
        };
        p.push(value);
    }

    let raw: Vec<Complex64> = grid
        .nodes()
        .map(|x| {
            let mut sum = Complex64::new(0.0, 0.0);
            for (row, value) in p.iter().enumerate() {
                let m = row as i64 - m_max as i64;
                let phase =
                    Complex64::new(0.0, 2.0 * std::f64::consts::PI * m as f64 * x / b).exp();
                sum += value * phase;
            }
            sum * (-xi * nu * x).exp() / b
        })
        .collect();
    Ok(realify(raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::data::ConstantQ2;

    fn constant_data(gamma: f64) -> OrderData {
        OrderData::ConstantQ2(ConstantQ2 { gamma, b: 1.0 })
    }

    fn interior_max_dev(q: &[f64], grid: &SpatialGrid, truth: impl Fn(f64) -> f64) -> f64 {
        grid.nodes()
            .enumerate()
            .filter(|(_, x)| (0.05..=0.95).contains(x))
            .map(|(i, x)| (q[i] - truth(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn continuous_route_recovers_constant_gamma() {
        let grid = SpatialGrid::new(1.0, 200).unwrap();
        let rec = fourier_invert_special(
            &constant_data(1.0),
            ThirdOrderSource::A3,
            SpecialMethod::ContinuousQuad {
                k_cutoff: 200.0,
                panels: None,
            },
            &grid,
        )
        .unwrap();
        let dev = interior_max_dev(&rec.q, &grid, |_| 1.0);
        assert!(dev <= 2e-2, "interior deviation {dev:e}");
    }

    #[test]
    fn zero_data_recovers_zero() {
        let grid = SpatialGrid::new(1.0, 64).unwrap();
        let rec = fourier_invert_special(
            &constant_data(0.0),
            ThirdOrderSource::A3,
            SpecialMethod::DiscreteSum { xi: 0.1, m_max: 32 },
            &grid,
        )
        .unwrap();
        assert!(rec.q.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn discrete_and_continuous_routes_agree_on_the_interior() {
        let grid = SpatialGrid::new(1.0, 200).unwrap();
        let data = constant_data(1.0);
        let continuous = fourier_invert_special(
            &data,
            ThirdOrderSource::A3,
            SpecialMethod::ContinuousQuad {
                k_cutoff: 200.0,
                panels: None,
            },
            &grid,
        )
        .unwrap();
        let discrete = fourier_invert_special(
            &data,
            ThirdOrderSource::A3,
            SpecialMethod::DiscreteSum {
                xi: 0.05,
                m_max: 128,
            },
            &grid,
        )
        .unwrap();
        let mut dev: f64 = 0.0;
        for (i, x) in grid.nodes().enumerate() {
            if (0.05..=0.95).contains(&x) {
                dev = dev.max((continuous.q[i] - discrete.q[i]).abs());
            }
        }
        assert!(dev <= 2e-2, "route disagreement {dev:e}");
    }

    #[test]
    fn b3_route_recovers_the_same_coefficient() {
        let grid = SpatialGrid::new(1.0, 200).unwrap();
        let rec = fourier_invert_special(
            &constant_data(1.5),
            ThirdOrderSource::B3,
            SpecialMethod::DiscreteSum {
                xi: 0.05,
                m_max: 128,
            },
            &grid,
        )
        .unwrap();
        let dev = interior_max_dev(&rec.q, &grid, |_| 1.5);
        assert!(dev <= 3e-2, "interior deviation {dev:e}");
    }
}
