use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::grid::{ComplexTrajectory, SpatialGrid};

/// Integration direction along the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Classical fixed-step RK4 on a first-order complex system.
///
/// `rhs(x, state, derivative)` fills `derivative` from `state`; snapshots are
/// returned per grid node in ascending-x order regardless of direction.
pub fn integrate_system<F>(
    rhs: F,
    initial: &[Complex64],
    grid: &SpatialGrid,
    direction: Direction,
) -> Result<Vec<Vec<Complex64>>>
where
    F: Fn(f64, &[Complex64], &mut [Complex64]),
{
    let dim = initial.len();
    let n_nodes = grid.len();
    let mut states = vec![vec![Complex64::new(0.0, 0.0); dim]; n_nodes];

    let (start, h) = match direction {
        Direction::Forward => (0usize, grid.step()),
        Direction::Backward => (n_nodes - 1, -grid.step()),
    };
    states[start] = initial.to_vec();

    let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();

    for step in 0..grid.panels() {
        let (from, to) = match direction {
            Direction::Forward => (step, step + 1),
            Direction::Backward => (n_nodes - 1 - step, n_nodes - 2 - step),
        };
        let x = grid.node(from);
        let x_mid = x + 0.5 * h;
        let x_next = grid.node(to);

        let current = states[from].clone();
        rhs(x, &current, &mut k1);
        for i in 0..dim {
            stage[i] = current[i] + k1[i] * (0.5 * h);
        }
        rhs(x_mid, &stage, &mut k2);
        for i in 0..dim {
            stage[i] = current[i] + k2[i] * (0.5 * h);
        }
        rhs(x_mid, &stage, &mut k3);
        for i in 0..dim {
            stage[i] = current[i] + k3[i] * h;
        }
        rhs(x_next, &stage, &mut k4);

        let next = &mut states[to];
        for i in 0..dim {
            next[i] = current[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
            if !next[i].is_finite() {
                return Err(Error::TrajectoryBlowUp { node: to });
            }
        }
    }

    Ok(states)
}

/// Integrates the second-order equation `u'' = f(x, u, u')` and returns the
/// sampled trajectory. Backward integration starts from `x = b`.
pub fn integrate_ivp<F>(
    rhs: F,
    initial_value: Complex64,
    initial_slope: Complex64,
    grid: &SpatialGrid,
    direction: Direction,
) -> Result<ComplexTrajectory>
where
    F: Fn(f64, Complex64, Complex64) -> Complex64,
{
    let states = integrate_system(
        |x, y, dy| {
            dy[0] = y[1];
            dy[1] = rhs(x, y[0], y[1]);
        },
        &[initial_value, initial_slope],
        grid,
        direction,
    )?;
    let values = states.iter().map(|s| s[0]).collect();
    let slopes = states.iter().map(|s| s[1]).collect();
    ComplexTrajectory::new(grid.clone(), values, slopes)
}
