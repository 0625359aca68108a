use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hierarchy::{forcing, jost_left, linear_scattering, CascadeState, SeriesCoefficients};
use crate::numerics::{quad, ComplexTrajectory, SpatialGrid};
use crate::potential::{CoefficientFunction, NonlinearPotential};

/// Third-order closed forms for the pure-`q2` potential with constant
/// coefficient `q2 = gamma`:
/// `A3 = -(gamma/8k^2)(1 - e^{-4ikb})`, `B3 = (gamma/4k^2)(1 - e^{-2ikb})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantQ2 {
    pub gamma: f64,
    pub b: f64,
}

/// Third-order closed forms for `q2 = e^{alpha x}`:
/// `A3 = (e^{(alpha-4ik)b} - 1) / (2ik(alpha - 4ik))`,
/// `B3 = -(e^{(alpha-2ik)b} - 1) / (2ik(alpha - 2ik))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialQ2 {
    pub alpha: f64,
    pub b: f64,
}

/// `k (1 - e^{-c k b}) / denominator`-style limits are handled through a
/// series expansion of `1 - e^{-z}` once `|z|` is tiny.
fn one_minus_exp(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        z - z * z / 2.0 + z * z * z / 6.0 - z * z * z * z / 24.0
    } else {
        1.0 - (-z).exp()
    }
}

impl ConstantQ2 {
    /// `k A3(k)`, entire in k.
    pub fn k_a3(&self, k: Complex64) -> Complex64 {
        let b = self.b;
        if k.norm() * b < 1e-6 {
            // -(gamma/8) (z - z^2/2 + z^3/6) / k with z = 4ikb, termwise
            let i = Complex64::i();
            return -(self.gamma / 8.0)
                * (4.0 * i * b + 8.0 * k * b * b - (32.0 / 3.0) * i * k * k * b * b * b);
        }
        let z = 4.0 * Complex64::i() * k * b;
        -(self.gamma / 8.0) * one_minus_exp(z) / k
    }

    pub fn k_b3(&self, k: Complex64) -> Complex64 {
        let b = self.b;
        if k.norm() * b < 1e-6 {
            let i = Complex64::i();
            return (self.gamma / 4.0)
                * (2.0 * i * b + 2.0 * k * b * b - (4.0 / 3.0) * i * k * k * b * b * b);
        }
        let z = 2.0 * Complex64::i() * k * b;
        (self.gamma / 4.0) * one_minus_exp(z) / k
    }

    pub fn a3(&self, k: Complex64) -> Complex64 {
        self.k_a3(k) / k
    }

    pub fn b3(&self, k: Complex64) -> Complex64 {
        self.k_b3(k) / k
    }
}

impl ExponentialQ2 {
    pub fn k_a3(&self, k: Complex64) -> Complex64 {
        let rate = self.alpha - 4.0 * Complex64::i() * k;
        ((rate * self.b).exp() - 1.0) / (2.0 * Complex64::i() * rate)
    }

    pub fn k_b3(&self, k: Complex64) -> Complex64 {
        let rate = self.alpha - 2.0 * Complex64::i() * k;
        -((rate * self.b).exp() - 1.0) / (2.0 * Complex64::i() * rate)
    }

    pub fn a3(&self, k: Complex64) -> Complex64 {
        self.k_a3(k) / k
    }

    pub fn b3(&self, k: Complex64) -> Complex64 {
        self.k_b3(k) / k
    }
}

/// Where order-n scattering coefficients come from when the inversion needs
/// them on the shifted contour. Entire extensions exist for every order, but
/// a table sampled on the real axis cannot be continued numerically; only
/// generative sources (closed forms, the cascade of a synthetic potential)
/// support complex k.
#[derive(Debug, Clone)]
pub enum OrderData {
    ConstantQ2(ConstantQ2),
    ExponentialQ2(ExponentialQ2),
    /// Coefficients computed on demand by the cascade of this potential.
    Synthetic {
        potential: NonlinearPotential,
    },
    /// Extracted coefficients on a real-k grid; complex evaluation errors.
    RealAxis {
        series: SeriesCoefficients,
    },
}

impl OrderData {
    /// `(k A_n(k), k B_n(k))` — both entire, so this is the form safe at
    /// `k = 0`.
    pub fn eval_k_ab(
        &self,
        n: usize,
        k: Complex64,
        grid: &SpatialGrid,
    ) -> Result<(Complex64, Complex64)> {
        match self {
            OrderData::ConstantQ2(d) => match n {
                2 => Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))),
                3 => Ok((d.k_a3(k), d.k_b3(k))),
                _ => Err(Error::MissingOrder { order: n }),
            },
            OrderData::ExponentialQ2(d) => match n {
                2 => Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))),
                3 => Ok((d.k_a3(k), d.k_b3(k))),
                _ => Err(Error::MissingOrder { order: n }),
            },
            OrderData::Synthetic { potential } => {
                let endpoints = cascade_endpoints(potential, k, n, grid)?;
                let (value, slope) = endpoints[n - 1];
                let i = Complex64::i();
                let b = grid.width();
                let ka = (k * value - i * slope) / 2.0 * (-i * k * b).exp();
                let kb = (k * value + i * slope) / 2.0 * (i * k * b).exp();
                Ok((ka, kb))
            }
            OrderData::RealAxis { series } => {
                if k.im.abs() > 1e-9 {
                    return Err(Error::ComplexEvalUnsupported { k: format!("{k}") });
                }
                if n > series.order_count() {
                    return Err(Error::MissingOrder { order: n });
                }
                let (a, b) = interp_real_axis(series, n, k.re)?;
                Ok((k * a, k * b))
            }
        }
    }

    /// `(A_n(k), B_n(k))` for nonzero k.
    pub fn eval_ab(
        &self,
        n: usize,
        k: Complex64,
        grid: &SpatialGrid,
    ) -> Result<(Complex64, Complex64)> {
        if k.norm() == 0.0 {
            return Err(Error::ZeroWavenumber);
        }
        let (ka, kb) = self.eval_k_ab(n, k, grid)?;
        Ok((ka / k, kb / k))
    }
}

/// Endpoint values and slopes of the cascade orders `u_1 .. u_{n_max}` at
/// `x = b`; runs at any complex k including zero.
fn cascade_endpoints(
    potential: &NonlinearPotential,
    k: Complex64,
    n_max: usize,
    grid: &SpatialGrid,
) -> Result<Vec<(Complex64, Complex64)>> {
    let trajectories = crate::hierarchy::cascade_trajectories(potential, k, n_max, grid)?;
    Ok(trajectories
        .iter()
        .map(|t| (t.end_value(), t.end_slope()))
        .collect())
}

fn interp_real_axis(
    series: &SeriesCoefficients,
    n: usize,
    k: f64,
) -> Result<(Complex64, Complex64)> {
    let ks: Vec<f64> = series.k_grid.iter().map(|c| c.re).collect();
    let (k_abs, conjugate) = if k < 0.0 { (-k, true) } else { (k, false) };
    let pick = |values: &[Complex64]| -> Result<Complex64> {
        if ks.len() == 1 {
            return Ok(values[0]);
        }
        let mut idx = None;
        for i in 0..ks.len() - 1 {
            if (ks[i]..=ks[i + 1]).contains(&k_abs) {
                idx = Some(i);
                break;
            }
        }
        let i = idx.ok_or_else(|| {
            Error::contract(
                "OrderData::eval",
                format!(
                    "k = {k_abs} outside tabulated range [{}, {}]",
                    ks[0],
                    ks[ks.len() - 1]
                ),
            )
        })?;
        let t = (k_abs - ks[i]) / (ks[i + 1] - ks[i]);
        Ok(values[i] * (1.0 - t) + values[i + 1] * t)
    };
    let a = pick(series.a_n(n))?;
    let b = pick(series.b_n(n))?;
    if conjugate {
        Ok((a.conj(), b.conj()))
    } else {
        Ok((a, b))
    }
}

/// The data needed to recover `q_{n-1}`: order-n coefficients plus the
/// already-known lower coefficients `q_0 .. q_{n-2}`.
#[derive(Debug, Clone)]
pub struct DataSetDn {
    pub n: usize,
    pub b: f64,
    pub data: OrderData,
    pub known: Vec<CoefficientFunction>,
}

impl DataSetDn {
    pub fn new(n: usize, b: f64, data: OrderData, known: Vec<CoefficientFunction>) -> Result<Self> {
        if n < 2 {
            return Err(Error::contract("DataSetDn::new", "order n must be >= 2"));
        }
        if known.len() != n - 1 {
            return Err(Error::contract(
                "DataSetDn::new",
                format!("expected {} known coefficients, got {}", n - 1, known.len()),
            ));
        }
        Ok(Self { n, b, data, known })
    }

    pub fn q0(&self) -> &CoefficientFunction {
        &self.known[0]
    }

    /// Potential assembled from the known coefficients with the unknown
    /// `q_{n-1}` treated as zero; enough to drive `u_2 .. u_{n-1}` and the
    /// forcing piece `h_n`, which never involves `q_{n-1}`.
    pub fn known_potential(&self) -> Result<NonlinearPotential> {
        NonlinearPotential::new(self.b, self.known.clone())
    }
}

/// The lower-order forcing `h_n(.; k)` derived from the known coefficients;
/// identically zero for `n = 2`.
pub fn compute_hn_for_data(
    d: &DataSetDn,
    k: Complex64,
    grid: &SpatialGrid,
) -> Result<ComplexTrajectory> {
    if d.n == 2 {
        return Ok(ComplexTrajectory::constant(
            grid.clone(),
            Complex64::new(0.0, 0.0),
        ));
    }
    let potential = d.known_potential()?;
    let state = crate::hierarchy::solve_cascade(&potential, k, d.n - 1, grid)?;
    let (_, h) = forcing(&potential, &state, d.n)?;
    Ok(h)
}

/// Cascade of the known coefficients, exposed so system assembly can reuse
/// the trajectories behind `h_n` instead of re-solving per quantity.
pub fn known_cascade(
    d: &DataSetDn,
    k: Complex64,
    grid: &SpatialGrid,
) -> Result<Option<CascadeState>> {
    if d.n == 2 {
        return Ok(None);
    }
    let potential = d.known_potential()?;
    Ok(Some(crate::hierarchy::solve_cascade(
        &potential,
        k,
        d.n - 1,
        grid,
    )?))
}

/// `E_n(k) = -2ik B_n(k) - int_0^b v_1(t;k) h_n(t;k) dt`.
pub fn compute_en(d: &DataSetDn, k: Complex64, grid: &SpatialGrid) -> Result<Complex64> {
    let (_, k_bn) = d.data.eval_k_ab(d.n, k, grid)?;
    let mut value = -2.0 * Complex64::i() * k_bn;
    if d.n > 2 {
        let h = compute_hn_for_data(d, k, grid)?;
        let v1 = jost_left(d.q0(), k, grid)?;
        let integrand: Vec<Complex64> = (0..grid.len()).map(|i| v1.value(i) * h.value(i)).collect();
        value -= quad(&integrand, grid)?;
    }
    Ok(value)
}

/// `F_n(k) = 2ik [B_1 A_n - A_1 B_n] - int_0^b u_1(t;k) h_n(t;k) dt`.
pub fn compute_fn(d: &DataSetDn, k: Complex64, grid: &SpatialGrid) -> Result<Complex64> {
    let (k_an, k_bn) = d.data.eval_k_ab(d.n, k, grid)?;
    let jost = linear_scattering(d.q0(), k, grid)?;
    let mut value = 2.0 * Complex64::i() * (jost.b1 * k_an - jost.a1 * k_bn);
    if d.n > 2 {
        let h = compute_hn_for_data(d, k, grid)?;
        let integrand: Vec<Complex64> = (0..grid.len())
            .map(|i| jost.u1.value(i) * h.value(i))
            .collect();
        value -= quad(&integrand, grid)?;
    }
    Ok(value)
}
