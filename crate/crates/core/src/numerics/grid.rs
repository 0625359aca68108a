use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform grid on `[0, b]` with an even number of panels so composite
/// Simpson quadrature applies directly to sampled trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    b: f64,
    step: f64,
    panels: usize,
}

impl SpatialGrid {
    pub fn new(b: f64, panels: usize) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidGrid {
                reason: format!("support width must be positive and finite, got {b}"),
            });
        }
        if panels < 2 || !panels.is_multiple_of(2) {
            return Err(Error::InvalidGrid {
                reason: format!("panel count must be even and >= 2, got {panels}"),
            });
        }
        Ok(Self {
            b,
            step: b / panels as f64,
            panels,
        })
    }

    /// Default resolution: 2000 panels per unit of support width.
    pub fn default_for_width(b: f64) -> Result<Self> {
        let per_unit = 2000.0 * b.max(1e-12);
        let mut panels = per_unit.ceil() as usize;
        if !panels.is_multiple_of(2) {
            panels += 1;
        }
        Self::new(b, panels.max(2000))
    }

    pub fn width(&self) -> f64 {
        self.b
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// Number of sample points, `panels + 1`.
    pub fn len(&self) -> usize {
        self.panels + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, index: usize) -> f64 {
        if index == self.panels {
            self.b
        } else {
            index as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Same interval with `factor` times as many panels; nodes of `self`
    /// coincide with every `factor`-th node of the result.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        let factor = factor.max(1);
        Self::new(self.b, self.panels * factor)
    }
}

/// A complex-valued function and its spatial derivative sampled on a grid.
#[derive(Debug, Clone)]
pub struct ComplexTrajectory {
    grid: SpatialGrid,
    values: Vec<Complex64>,
    slopes: Vec<Complex64>,
}

impl ComplexTrajectory {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, slopes: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() || slopes.len() != grid.len() {
            return Err(Error::contract(
                "ComplexTrajectory::new",
                format!(
                    "expected {} samples, got {} values and {} slopes",
                    grid.len(),
                    values.len(),
                    slopes.len()
                ),
            ));
        }
        Ok(Self {
            grid,
            values,
            slopes,
        })
    }

    pub fn constant(grid: SpatialGrid, value: Complex64) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![value; n],
            slopes: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, index: usize) -> Complex64 {
        self.values[index]
    }

    pub fn slope(&self, index: usize) -> Complex64 {
        self.slopes[index]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn slopes(&self) -> &[Complex64] {
        &self.slopes
    }

    pub fn end_value(&self) -> Complex64 {
        *self.values.last().expect("trajectory is never empty")
    }

    pub fn end_slope(&self) -> Complex64 {
        *self.slopes.last().expect("trajectory is never empty")
    }

    /// Linear interpolation of value and slope at an arbitrary position,
    /// clamped to `[0, b]`.
    pub fn at(&self, x: f64) -> (Complex64, Complex64) {
        let h = self.grid.step();
        let max_index = self.len() - 1;
        let position = (x / h).clamp(0.0, max_index as f64);
        let lower = (position.floor() as usize).min(max_index - 1);
        let t = position - lower as f64;
        let value = self.values[lower] * (1.0 - t) + self.values[lower + 1] * t;
        let slope = self.slopes[lower] * (1.0 - t) + self.slopes[lower + 1] * t;
        (value, slope)
    }

    /// Restriction to every `factor`-th node. The factor must divide the
    /// panel count and leave an even number of coarse panels.
    pub fn downsampled(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.grid.panels().is_multiple_of(factor) {
            return Err(Error::contract(
                "ComplexTrajectory::downsampled",
                format!(
                    "factor {factor} does not divide {} panels",
                    self.grid.panels()
                ),
            ));
        }
        let coarse = SpatialGrid::new(self.grid.width(), self.grid.panels() / factor)?;
        let values = self.values.iter().step_by(factor).copied().collect();
        let slopes = self.slopes.iter().step_by(factor).copied().collect();
        Self::new(coarse, values, slopes)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
