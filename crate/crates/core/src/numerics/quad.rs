use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::grid::SpatialGrid;

fn check_len(operation: &str, len: usize, grid: &SpatialGrid) -> Result<()> {
    if len != grid.len() {
        return Err(Error::contract(
            operation,
            format!("expected {} samples, got {}", grid.len(), len),
        ));
    }
    Ok(())
}

/// Composite Simpson weights `h/3 * [1, 4, 2, 4, ..., 4, 1]`.
pub fn quad_weights(grid: &SpatialGrid) -> Vec<f64> {
    let h = grid.step();
    let n = grid.len();
    let mut weights = vec![0.0; n];
    weights[0] = h / 3.0;
    weights[n - 1] = h / 3.0;
    for (i, w) in weights.iter_mut().enumerate().take(n - 1).skip(1) {
        *w = if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    weights
}

/// Composite Simpson value of the sampled integrand over `[0, b]`.
pub fn quad(samples: &[Complex64], grid: &SpatialGrid) -> Result<Complex64> {
    check_len("quad", samples.len(), grid)?;
    let h = grid.step();
    let n = samples.len();
    let mut odd = Complex64::new(0.0, 0.0);
    let mut even = Complex64::new(0.0, 0.0);
    for (i, s) in samples.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += s;
        } else {
            even += s;
        }
    }
    Ok((samples[0] + samples[n - 1] + odd * 4.0 + even * 2.0) * (h / 3.0))
}

pub fn quad_real(samples: &[f64], grid: &SpatialGrid) -> Result<f64> {
    let complex: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    quad(&complex, grid).map(|v| v.re)
}

/// Cumulative integral `F(x_i) = \int_0^{x_i} f`, fourth-order accurate.
///
/// Even indices use composite Simpson; odd indices add the last panel by
/// integrating the quadratic through the three nearest nodes.
pub fn cumquad(samples: &[Complex64], grid: &SpatialGrid) -> Result<Vec<Complex64>> {
    check_len("cumquad", samples.len(), grid)?;
    let h = grid.step();
    let n = samples.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n >= 3 {
        // first panel from the quadratic through nodes 0, 1, 2
        out[1] = (samples[0] * 5.0 + samples[1] * 8.0 - samples[2]) * (h / 12.0);
    }
    for i in (2..n).step_by(2) {
        out[i] = out[i - 2] + (samples[i - 2] + samples[i - 1] * 4.0 + samples[i]) * (h / 3.0);
        if i + 1 < n {
            out[i + 1] =
                out[i] + (-samples[i - 1] + samples[i] * 8.0 + samples[i + 1] * 5.0) * (h / 12.0);
        }
    }
    Ok(out)
}
