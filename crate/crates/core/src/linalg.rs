//! Dense matrices and a cyclic-Jacobi eigensolver for real symmetric
//! matrices. Everything here is plain `f64` with deterministic evaluation
//! order, so repeated runs produce bit-identical results.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_data(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Gram matrix of the columns: `G[i][j] = column_i . column_j`.
    ///
    /// Works on a transposed copy so the dot products run over contiguous
    /// memory; the summation order per entry is unchanged (feature index
    /// ascending), so the result is identical to the naive column walk.
    pub fn column_gram(&self) -> Matrix {
        let m = self.cols;
        let n = self.rows;
        let mut t = vec![0.0f64; m * n]; // t[c][r] = self[r][c]
        for r in 0..n {
            for c in 0..m {
                t[c * n + r] = self.data[r * m + c];
            }
        }
        let mut g = Matrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let a = &t[i * n..(i + 1) * n];
                let b = &t[j * n..(j + 1) * n];
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                g.set(i, j, dot);
                g.set(j, i, dot);
            }
        }
        g
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }
}

/// Sorted eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, aligned with `eigenvalues`. Each vector's
    /// largest-magnitude entry is positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations.
///
/// Sweeps rotate every upper-triangle pair per pass; iteration stops when
/// the off-diagonal Frobenius norm falls below `1e-12 * ||A||_F`, with a cap
/// of 100 sweeps. Eigenpairs are returned sorted by descending eigenvalue
/// with deterministic sign canonicalization.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if n == 0 || a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (a.get(i, j) - a.get(j, i)).abs() > 1e-9 {
                return Err(Error::NotSymmetric);
            }
        }
    }

    let mut w: Vec<f64> = a.data().to_vec(); // working copy, stays symmetric
    let mut v = vec![0.0f64; n * n]; // accumulated rotations, row-major
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let norm = a.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOL * norm;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        if off_sq.sqrt() <= threshold {
            converged = true;
            break;
        }

        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                w[p * n + p] = app - t * apq;
                w[q * n + q] = aqq + t * apq;
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = w[i * n + p];
                    let aiq = w[i * n + q];
                    let new_ip = c * aip - s * aiq;
                    let new_iq = s * aip + c * aiq;
                    w[i * n + p] = new_ip;
                    w[p * n + i] = new_ip;
                    w[i * n + q] = new_iq;
                    w[q * n + i] = new_iq;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        if off_sq.sqrt() > threshold {
            return Err(Error::ConvergenceFailure(MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j * n + j].partial_cmp(&w[i * n + i]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| w[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| {
            let mut vec: Vec<f64> = (0..n).map(|r| v[r * n + col]).collect();
            canonicalize_sign(&mut vec);
            vec
        })
        .collect();

    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Flips the vector so its largest-magnitude entry is positive. Ties keep
/// the earliest such entry, so the outcome is deterministic.
pub fn canonicalize_sign(v: &mut [f64]) {
    let mut idx = 0;
    let mut best = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
