//! Small dense linear algebra and scalar root finding.
//!
//! These kernels are the independent oracles the closed-form results are
//! checked against, so they stay deliberately plain: Gaussian elimination
//! with partial pivoting, bisection and central differences.

use crate::error::{Error, Result};

/// Relative pivot threshold, measured against the largest matrix entry.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Default iteration cap for [`bisect`].
pub const DEFAULT_MAX_ITER: usize = 200;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "matrix entries must be finite, found {bad}"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Max-norm distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] as soon as the best available pivot
/// drops to `PIVOT_TOLERANCE * max|A_ij|` or below.
pub fn linsolve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let threshold = PIVOT_TOLERANCE * a.max_abs();
    let mut m = a.data.clone();
    let mut x = b.to_vec();

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= threshold {
            return Err(Error::SingularMatrix {
                column: col,
                pivot: pivot_abs,
                threshold,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            m[r * n + col] = 0.0;
            for j in col + 1..n {
                m[r * n + j] -= factor * m[col * n + j];
            }
            x[r] -= factor * x[col];
        }
    }

    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|j| m[row * n + j] * x[j]).sum();
        x[row] = (x[row] - tail) / m[row * n + row];
    }
    Ok(x)
}

/// A sign-change interval `[lo, hi]` together with the function values at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// Evaluates `f` at both ends and checks that it straddles a root.
    pub fn new<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidBracket { lo, hi });
        }
        let f_lo = finite(lo, f(lo))?;
        let f_hi = finite(hi, f(hi))?;
        Self::from_values(lo, hi, f_lo, f_hi)
    }

    pub fn from_values(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidBracket { lo, hi });
        }
        if f_lo * f_hi > 0.0 {
            return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn finite(x: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NotFinite { x, value })
    }
}

/// Bisection on a valid bracket until `hi - lo <= rel_tol * |x|`.
///
/// Returns the midpoint of the final interval (or an exact zero if one is hit).
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = finite(mid, f(mid))?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_step: hi - lo,
    })
}

/// Central difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    assert!(h > 0.0, "central_diff step must be positive, got {h}");
    (f(x + h) - f(x - h)) / (2.0 * h)
}
