//! The amplitude-dependent potential `Q(x, u) = sum_{n=0}^{D} q_n(x) u^n`
//! as a finite truncated series of compactly supported coefficient
//! functions, together with the small-amplitude existence bound
//! `delta = (r/2) exp(-C b^2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{quad_real, SpatialGrid};

/// Shape of a single coefficient function on its support.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientKind {
    Zero,
    Constant {
        value: f64,
    },
    /// `e^{rate * x}` on the support.
    Exponential {
        rate: f64,
    },
    /// `amplitude * sin(wavenumber * x)` on the support.
    Sinusoid {
        amplitude: f64,
        wavenumber: f64,
    },
    /// Linear interpolation between uniform samples; defined at every point
    /// of the support so integrators can evaluate between nodes.
    Tabulated {
        grid: SpatialGrid,
        samples: Vec<f64>,
    },
}

/// A real-valued coefficient function `q_n(x)` supported in `[0, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFunction {
    kind: CoefficientKind,
    b: f64,
}

impl CoefficientFunction {
    pub fn new(kind: CoefficientKind, b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::contract(
                "CoefficientFunction::new",
                format!("support width must be positive, got {b}"),
            ));
        }
        if let CoefficientKind::Tabulated { grid, samples } = &kind {
            if samples.len() != grid.len() {
                return Err(Error::contract(
                    "CoefficientFunction::new",
                    format!(
                        "tabulated coefficient needs {} samples, got {}",
                        grid.len(),
                        samples.len()
                    ),
                ));
            }
            if (grid.width() - b).abs() > 1e-12 * b {
                return Err(Error::contract(
                    "CoefficientFunction::new",
                    format!(
                        "tabulated grid width {} does not match support width {b}",
                        grid.width()
                    ),
                ));
            }
        }
        Ok(Self { kind, b })
    }

    pub fn zero(b: f64) -> Self {
        Self {
            kind: CoefficientKind::Zero,
            b,
        }
    }

    pub fn constant(value: f64, b: f64) -> Self {
        Self {
            kind: CoefficientKind::Constant { value },
            b,
        }
    }

    pub fn exponential(rate: f64, b: f64) -> Self {
        Self {
            kind: CoefficientKind::Exponential { rate },
            b,
        }
    }

    pub fn sinusoid(amplitude: f64, wavenumber: f64, b: f64) -> Self {
        Self {
            kind: CoefficientKind::Sinusoid {
                amplitude,
                wavenumber,
            },
            b,
        }
    }

    pub fn tabulated(grid: SpatialGrid, samples: Vec<f64>) -> Result<Self> {
        let b = grid.width();
        Self::new(CoefficientKind::Tabulated { grid, samples }, b)
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn support_width(&self) -> f64 {
        self.b
    }

    /// Value at `x`; identically zero outside `[0, b]`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=self.b).contains(&x) {
            return 0.0;
        }
        match &self.kind {
            CoefficientKind::Zero => 0.0,
            CoefficientKind::Constant { value } => *value,
            CoefficientKind::Exponential { rate } => (rate * x).exp(),
            CoefficientKind::Sinusoid {
                amplitude,
                wavenumber,
            } => amplitude * (wavenumber * x).sin(),
            CoefficientKind::Tabulated { grid, samples } => {
                let h = grid.step();
                let max_index = samples.len() - 1;
                let position = (x / h).clamp(0.0, max_index as f64);
                let lower = (position.floor() as usize).min(max_index - 1);
                let t = position - lower as f64;
                samples[lower] * (1.0 - t) + samples[lower + 1] * t
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            CoefficientKind::Zero => true,
            CoefficientKind::Constant { value } => *value == 0.0,
            CoefficientKind::Sinusoid { amplitude, .. } => *amplitude == 0.0,
            CoefficientKind::Exponential { .. } => false,
            CoefficientKind::Tabulated { samples, .. } => samples.iter().all(|s| *s == 0.0),
        }
    }

    /// `sup_{[0,b]} |q|`, exact for every kind.
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Zero => 0.0,
            CoefficientKind::Constant { value } => value.abs(),
            CoefficientKind::Exponential { rate } => {
                if *rate >= 0.0 {
                    (rate * self.b).exp()
                } else {
                    1.0
                }
            }
            CoefficientKind::Sinusoid {
                amplitude,
                wavenumber,
            } => {
                let span = (wavenumber * self.b).abs();
                if span >= std::f64::consts::FRAC_PI_2 {
                    amplitude.abs()
                } else {
                    amplitude.abs() * span.sin()
                }
            }
            CoefficientKind::Tabulated { samples, .. } => {
                samples.iter().map(|s| s.abs()).fold(0.0, f64::max)
            }
        }
    }

    /// `int_0^b |q|`, exact for constants and exponentials, composite
    /// Simpson on a fine grid otherwise.
    pub fn l1_norm(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Zero => 0.0,
            CoefficientKind::Constant { value } => value.abs() * self.b,
            CoefficientKind::Exponential { rate } => {
                if rate.abs() < 1e-14 {
                    self.b
                } else {
                    ((rate * self.b).exp() - 1.0) / rate
                }
            }
            _ => {
                let grid = SpatialGrid::default_for_width(self.b)
                    .expect("valid support width was checked at construction");
                let samples: Vec<f64> = grid.nodes().map(|x| self.eval(x).abs()).collect();
                quad_real(&samples, &grid).expect("sample count matches grid")
            }
        }
    }
}

/// Bound from the small-amplitude existence argument: for trial radius `r`
/// and `C = sup |Q|` over `x` in the support and `|u| <= r`, forward solves
/// are guaranteed for incident amplitudes `|eps| <= delta = (r/2) e^{-C b^2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceEstimate {
    pub r: f64,
    pub c_bound: f64,
    pub delta: f64,
}

/// Truncated potential series `Q(x, u) = sum_{n=0}^{D} q_n(x) u^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearPotential {
    b: f64,
    coeffs: Vec<CoefficientFunction>,
}

impl NonlinearPotential {
    /// `coeffs[n]` is the coefficient of `u^n`; the list must be nonempty
    /// and all entries must share the support width `b`.
    pub fn new(b: f64, coeffs: Vec<CoefficientFunction>) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::contract(
                "NonlinearPotential::new",
                format!("support width must be positive, got {b}"),
            ));
        }
        if coeffs.is_empty() {
            return Err(Error::contract(
                "NonlinearPotential::new",
                "coefficient list must contain at least q0",
            ));
        }
        for (n, c) in coeffs.iter().enumerate() {
            if (c.support_width() - b).abs() > 1e-12 * b {
                return Err(Error::contract(
                    "NonlinearPotential::new",
                    format!(
                        "coefficient q{n} has support width {}, expected {b}",
                        c.support_width()
                    ),
                ));
            }
        }
        Ok(Self { b, coeffs })
    }

    pub fn zero(b: f64) -> Result<Self> {
        Self::new(b, vec![CoefficientFunction::zero(b)])
    }

    /// Potential with a single nonzero coefficient `q_power`.
    pub fn single_term(b: f64, power: usize, coeff: CoefficientFunction) -> Result<Self> {
        let mut coeffs = vec![CoefficientFunction::zero(b); power + 1];
        coeffs[power] = coeff;
        Self::new(b, coeffs)
    }

    pub fn support_width(&self) -> f64 {
        self.b
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[CoefficientFunction] {
        &self.coeffs
    }

    /// Coefficient of `u^n`; powers beyond the truncation degree are zero.
    pub fn coeff(&self, n: usize) -> CoefficientFunction {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| CoefficientFunction::zero(self.b))
    }

    pub fn q0(&self) -> &CoefficientFunction {
        &self.coeffs[0]
    }

    /// True when every nonlinear coefficient (`n >= 1`) vanishes.
    pub fn is_linear(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    /// Horner evaluation of `sum_n q_n(x) u^n`; zero outside the support.
    pub fn eval_q(&self, x: f64, u: Complex64) -> Complex64 {
        if !(0.0..=self.b).contains(&x) {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * u + c.eval(x);
        }
        acc
    }

    /// `C = sum_n (sup |q_n|) r^n`, an upper bound for `|Q(x, u)|` on
    /// `|u| <= r`.
    pub fn sup_bound(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::contract(
                "sup_bound",
                format!("amplitude bound must be positive, got {r}"),
            ));
        }
        let mut c = 0.0;
        let mut r_pow = 1.0;
        for coeff in &self.coeffs {
            c += coeff.sup_norm() * r_pow;
            r_pow *= r;
        }
        Ok(c)
    }

    /// Existence estimate `delta = (r/2) e^{-C b^2}`. The bound is
    /// sufficient, not necessary: larger amplitudes may still solve but are
    /// flagged by callers.
    pub fn epsilon_bound(&self, r: f64) -> Result<ExistenceEstimate> {
        let c_bound = self.sup_bound(r)?;
        Ok(ExistenceEstimate {
            r,
            c_bound,
            delta: 0.5 * r * (-c_bound * self.b * self.b).exp(),
        })
    }
}
