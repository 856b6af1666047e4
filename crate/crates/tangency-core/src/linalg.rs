//! Small dense linear maps `R^cols -> R^rows`, stored row-major.
//!
//! The maps that occur here are tiny (a graph datum in ambient dimension n
//! has shape (n-k) x k with n <= 4 or so), so everything is hand-rolled.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Dense row-major matrix acting on column vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LinMap {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl LinMap {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        LinMap {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        LinMap {
            rows: r,
            cols: c,
            data,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in apply");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &LinMap) -> LinMap {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        LinMap {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &LinMap) -> LinMap {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        LinMap {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> LinMap {
        LinMap {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Rank-one update `self + u v^T`, used for cutoff-gradient terms.
    pub fn add_outer(&self, u: &[f64], v: &[f64]) -> LinMap {
        assert_eq!(u.len(), self.rows);
        assert_eq!(v.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * self.cols + j] += u[i] * v[j];
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        math::sqrt(self.data.iter().map(|a| a * a).sum())
    }

    pub fn max_abs(&self) -> f64 {
        math::norm_inf(&self.data)
    }

    /// Spectral (operator) norm by power iteration on `A^T A`.
    ///
    /// Exact for rank-one maps; for the tiny matrices used here 128
    /// iterations are far past convergence.
    pub fn op_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        if self.rows == 1 {
            return math::norm(&self.data);
        }
        if self.cols == 1 {
            return math::norm(&self.data);
        }
        let f = self.frobenius();
        if f == 0.0 {
            return 0.0;
        }
        // Gram matrix G = A^T A (cols x cols).
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for r in 0..self.rows {
                    acc += self.get(r, i) * self.get(r, j);
                }
                g[i * n + j] = acc;
            }
        }
        let mut v = vec![1.0 / math::sqrt(n as f64); n];
        let mut lam = 0.0;
        for _ in 0..128 {
            let mut w = vec![0.0; n];
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += g[i * n + j] * v[j];
                }
                w[i] = acc;
            }
            let nw = math::norm(&w);
            if nw == 0.0 {
                return 0.0;
            }
            lam = nw;
            for i in 0..n {
                v[i] = w[i] / nw;
            }
        }
        math::sqrt(lam)
    }
}

/// Euclidean distance between two points.
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}
