//! Minimal dense linear algebra: a row-major matrix, a cyclic Jacobi
//! eigensolver for symmetric matrices, and the solves built on top of it.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

// resolves to inherent f64 methods when std is in the crate graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build a matrix by evaluating `f(row, col)` at every entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Wrap an existing row-major buffer. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix buffer length mismatch");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row `r` as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Underlying row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest relative asymmetry `|a_ij - a_ji| / scale`, zero for a 1x1.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs() / scale);
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Eigendecomposition of a symmetric matrix: `a = V diag(values) V^T`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, unsorted.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `values`.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver. Converges quadratically for symmetric input;
/// the strictly lower triangle is ignored.
pub fn symmetric_eigen(a: &Matrix) -> SymmetricEigen {
    assert_eq!(a.rows(), a.cols(), "eigensolve needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    // mirror the upper triangle so rounding asymmetry cannot leak in
    for i in 0..n {
        for j in (i + 1)..n {
            let v = m[(i, j)];
            m[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[(i, j)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-30 * scale {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    // avoid overflow in theta^2; rotation is then tiny
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = m[(p, p)];
                let aqq = m[(q, q)];
                m[(p, p)] = app - t * apq;
                m[(q, q)] = aqq + t * apq;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = m[(r, p)];
                        let arq = m[(r, q)];
                        m[(r, p)] = arp - s * (arq + tau * arp);
                        m[(p, r)] = m[(r, p)];
                        m[(r, q)] = arq + s * (arp - tau * arq);
                        m[(q, r)] = m[(r, q)];
                    }
                }
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    let values = (0..n).map(|i| m[(i, i)]).collect();
    SymmetricEigen {
        values,
        vectors: v,
    }
}

/// Outcome of the symmetric solve.
#[derive(Debug, Clone)]
pub struct SymmetricSolve {
    /// Solution vector: exact inverse when well conditioned, otherwise the
    /// minimum-norm least-squares solution over the retained eigenspace.
    pub solution: Vec<f64>,
    /// Ratio of largest to smallest absolute eigenvalue (infinite if zero).
    pub condition: f64,
    /// Whether any eigenvalue fell below the rank tolerance.
    pub rank_deficient: bool,
    /// Euclidean norm of `a x - b`.
    pub residual: f64,
}

/// Solve `a x = b` for symmetric `a` through the eigendecomposition.
/// Eigenvalues with `|lambda| <= rank_tol * max|lambda|` are dropped, which
/// yields the minimum-norm least-squares solution for singular systems.
pub fn solve_symmetric(a: &Matrix, b: &[f64], rank_tol: f64) -> SymmetricSolve {
    let n = a.rows();
    assert_eq!(b.len(), n);
    let eig = symmetric_eigen(a);
    let max_abs = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_abs = eig
        .values
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition = if max_abs == 0.0 {
        f64::INFINITY
    } else if min_abs == 0.0 {
        f64::INFINITY
    } else {
        max_abs / min_abs
    };
    let tol = rank_tol * max_abs;

    let mut x = vec![0.0; n];
    let mut rank_deficient = false;
    for k in 0..n {
        let lambda = eig.values[k];
        if lambda.abs() <= tol {
            rank_deficient = true;
            continue;
        }
        let mut proj = 0.0;
        for i in 0..n {
            proj += eig.vectors[(i, k)] * b[i];
        }
        let coeff = proj / lambda;
        for i in 0..n {
            x[i] += coeff * eig.vectors[(i, k)];
        }
    }

    let ax = a.matvec(&x);
    let residual = ax
        .iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt();

    SymmetricSolve {
        solution: x,
        condition,
        rank_deficient,
        residual,
    }
}

/// Solve a general square system by LU with partial pivoting.
pub fn solve_lu(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut lu = a.clone();
    let mut x: Vec<f64> = b.to_vec();

    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if lu[(r, col)].abs() > lu[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if lu[(pivot, col)] == 0.0 {
            return Err(Error::NoSolution { residual: f64::NAN });
        }
        if pivot != col {
            for c in 0..n {
                let tmp = lu[(col, c)];
                lu[(col, c)] = lu[(pivot, c)];
                lu[(pivot, c)] = tmp;
            }
            x.swap(col, pivot);
        }
        for r in (col + 1)..n {
            let factor = lu[(r, col)] / lu[(col, col)];
            lu[(r, col)] = factor;
            for c in (col + 1)..n {
                let sub = factor * lu[(col, c)];
                lu[(r, c)] -= sub;
            }
            x[r] -= factor * x[col];
        }
    }
    for r in (0..n).rev() {
        for c in (r + 1)..n {
            let sub = lu[(r, c)] * x[c];
            x[r] -= sub;
        }
        x[r] /= lu[(r, r)];
    }
    Ok(x)
}

/// Euclidean norm of a vector.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Infinity norm of a vector.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
