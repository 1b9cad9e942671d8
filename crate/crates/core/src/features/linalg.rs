//! Small dense helpers for the subspace iteration: a row-major matrix,
//! column orthonormalization and a cyclic Jacobi symmetric eigensolver.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Keeps the first `n` columns.
    pub fn truncate_cols(&self, n: usize) -> Matrix {
        let mut out = Matrix::zeros(self.rows, n);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[..n]);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Orthonormalizes the columns in place with two passes of modified
/// Gram-Schmidt. Columns that collapse numerically are replaced by unit
/// vectors orthogonal to the previous ones, so the result always has
/// orthonormal columns.
pub fn orthonormalize_columns(m: &mut Matrix) {
    let (rows, cols) = (m.rows, m.cols);
    for j in 0..cols {
        let original: f64 = (0..rows).map(|i| m[(i, j)] * m[(i, j)]).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for p in 0..j {
                let dot: f64 = (0..rows).map(|i| m[(i, p)] * m[(i, j)]).sum();
                for i in 0..rows {
                    let v = m[(i, p)];
                    m[(i, j)] -= dot * v;
                }
            }
        }
        let norm: f64 = (0..rows).map(|i| m[(i, j)] * m[(i, j)]).sum::<f64>().sqrt();
        if norm > 1e-10 * original.max(f64::MIN_POSITIVE) && norm > 1e-300 {
            for i in 0..rows {
                m[(i, j)] /= norm;
            }
        } else {
            replace_with_complement(m, j);
        }
    }
}

fn replace_with_complement(m: &mut Matrix, j: usize) {
    let rows = m.rows;
    for e in 0..rows {
        for i in 0..rows {
            m[(i, j)] = if i == e { 1.0 } else { 0.0 };
        }
        for _pass in 0..2 {
            for p in 0..j {
                let dot: f64 = (0..rows).map(|i| m[(i, p)] * m[(i, j)]).sum();
                for i in 0..rows {
                    let v = m[(i, p)];
                    m[(i, j)] -= dot * v;
                }
            }
        }
        let norm: f64 = (0..rows).map(|i| m[(i, j)] * m[(i, j)]).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for i in 0..rows {
                m[(i, j)] /= norm;
            }
            return;
        }
    }
    // only reachable with more columns than rows
    for i in 0..rows {
        m[(i, j)] = 0.0;
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and the matching eigenvectors
/// as columns.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows;
    assert_eq!(n, a.cols, "symmetric_eigen needs a square matrix");
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, new)] = v[(k, old)];
        }
    }
    (values, vectors)
}
