use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::contract("ComplexMatrix::from_rows", "ragged rows"));
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn adjoint_matvec(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            let yr = y[r];
            for (c, a) in self.row(r).iter().enumerate() {
                out[c] += a.conj() * yr;
            }
        }
        out
    }

    /// Largest singular value via power iteration on `A^H A`.
    pub fn spectral_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        // deterministic start vector with unequal components
        let mut v: Vec<Complex64> = (0..self.cols)
            .map(|i| Complex64::new(1.0 + (i as f64 * 0.7).sin(), 0.3 * (i as f64 * 1.3).cos()))
            .collect();
        normalize(&mut v);
        let mut sigma = 0.0;
        for _ in 0..500 {
            let w = self.matvec(&v);
            let mut next = self.adjoint_matvec(&w);
            let norm = normalize(&mut next);
            if norm == 0.0 {
                return 0.0;
            }
            let new_sigma = norm.sqrt();
            let done = (new_sigma - sigma).abs() <= 1e-13 * new_sigma.max(1.0);
            sigma = new_sigma;
            v = next;
            if done {
                break;
            }
        }
        sigma
    }
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for c in v.iter_mut() {
            *c /= norm;
        }
    }
    norm
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vector_sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Solution of a dense linear system together with its residual norm.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub x: Vec<Complex64>,
    pub residual: f64,
}

/// Gaussian elimination with partial pivoting. A pivot below
/// `1e-13 * max |a_ij|` reports the system as numerically singular.
pub fn solve_dense(matrix: &ComplexMatrix, rhs: &[Complex64]) -> Result<DenseSolution> {
    let n = matrix.rows();
    if n == 0 || matrix.cols() != n {
        return Err(Error::contract(
            "solve_dense",
            format!(
                "expected square system, got {}x{}",
                matrix.rows(),
                matrix.cols()
            ),
        ));
    }
    if rhs.len() != n {
        return Err(Error::contract(
            "solve_dense",
            format!("rhs length {} does not match dimension {n}", rhs.len()),
        ));
    }

    let threshold = 1e-13 * matrix.max_magnitude();
    let mut a = matrix.clone();
    let mut b = rhs.to_vec();

    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, a.get(r, col).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty column");
        if pivot_mag <= threshold {
            return Err(Error::NumericallySingular {
                pivot: pivot_mag,
                threshold,
            });
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = a.get(col, c);
                a.set(col, c, a.get(pivot_row, c));
                a.set(pivot_row, c, tmp);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a.get(col, col);
        let b_col = b[col];
        for r in (col + 1)..n {
            let factor = a.get(r, col) / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let updated = a.get(r, c) - factor * a.get(col, c);
                a.set(r, c, updated);
            }
            b[r] -= factor * b_col;
        }
    }

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for col in (0..n).rev() {
        let mut sum = b[col];
        for c in (col + 1)..n {
            sum -= a.get(col, c) * x[c];
        }
        x[col] = sum / a.get(col, col);
    }

    let mut residual_sq = 0.0;
    let ax = matrix.matvec(&x);
    for (axi, bi) in ax.iter().zip(rhs) {
        residual_sq += (axi - bi).norm_sqr();
    }
    Ok(DenseSolution {
        x,
        residual: residual_sq.sqrt(),
    })
}

/// One-norm condition estimate computed from explicit inverse columns;
/// intended for small systems such as extraction Vandermonde matrices.
pub fn condition_estimate(matrix: &ComplexMatrix) -> Result<f64> {
    let n = matrix.rows();
    let norm_a = one_norm(matrix);
    let mut norm_inv: f64 = 0.0;
    for col in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[col] = Complex64::new(1.0, 0.0);
        let solution = solve_dense(matrix, &e)?;
        let col_sum: f64 = solution.x.iter().map(|v| v.norm()).sum();
        norm_inv = norm_inv.max(col_sum);
    }
    Ok(norm_a * norm_inv)
}

fn one_norm(matrix: &ComplexMatrix) -> f64 {
    let mut max: f64 = 0.0;
    for col in 0..matrix.cols() {
        let sum: f64 = (0..matrix.rows()).map(|r| matrix.get(r, col).norm()).sum();
        max = max.max(sum);
    }
    max
}
