//! Small dense square matrices over `f64`.
//!
//! The lab works in dimension `k <= 6`, so a flat row-major buffer with
//! straightforward loops is all that is needed. Operations that need a real
//! eigensolver go through `nalgebra`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    k: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(k: usize) -> Self {
        Matrix {
            k,
            data: vec![0.0; k * k],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k);
        for i in 0..k {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// `E_ij`: the matrix unit with a single 1 at `(i, j)`.
    pub fn unit(k: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(k);
        m[(i, j)] = 1.0;
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(LabError::Domain("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(k * k);
        for r in rows {
            if r.len() != k {
                return Err(LabError::DimensionMismatch {
                    expected: k,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { k, data })
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.k).map(|i| self[(i, j)]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.k);
        for i in 0..self.k {
            for j in 0..self.k {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self * x` for an integer coefficient vector.
    pub fn mul_int_vec(&self, x: &[i64]) -> Vec<f64> {
        (0..self.k)
            .map(|i| self.row(i).iter().zip(x).map(|(a, &b)| a * b as f64).sum())
            .collect()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        Matrix {
            k: self.k,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            k: self.k,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Max-entry norm `max_ij |a_ij|`.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Operator norm induced by the sup-norm on vectors (max absolute row sum).
    pub fn op_norm_inf(&self) -> f64 {
        (0..self.k)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn distance_from_identity(&self) -> f64 {
        self.sub(&Matrix::identity(self.k)).sup_norm()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let k = self.k;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for c in 0..k {
            let p = (c..k)
                .max_by(|&x, &y| a[x * k + c].abs().total_cmp(&a[y * k + c].abs()))
                .unwrap();
            if a[p * k + c] == 0.0 {
                return 0.0;
            }
            if p != c {
                for j in 0..k {
                    a.swap(p * k + j, c * k + j);
                }
                det = -det;
            }
            let piv = a[c * k + c];
            det *= piv;
            for r in c + 1..k {
                let f = a[r * k + c] / piv;
                if f != 0.0 {
                    for j in c..k {
                        a[r * k + j] -= f * a[c * k + j];
                    }
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        let k = self.k;
        let mut a = self.clone();
        let mut inv = Matrix::identity(k);
        let scale = self.sup_norm().max(f64::MIN_POSITIVE);
        for c in 0..k {
            let p = (c..k)
                .max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))
                .unwrap();
            if a[(p, c)].abs() <= 1e-300 * scale || !a[(p, c)].is_finite() {
                return Err(LabError::Numeric("singular matrix".into()));
            }
            if p != c {
                a.swap_rows(p, c);
                inv.swap_rows(p, c);
            }
            let piv = a[(c, c)];
            for j in 0..k {
                a[(c, j)] /= piv;
                inv[(c, j)] /= piv;
            }
            for r in 0..k {
                if r != c {
                    let f = a[(r, c)];
                    if f != 0.0 {
                        for j in 0..k {
                            a[(r, j)] -= f * a[(c, j)];
                            inv[(r, j)] -= f * inv[(c, j)];
                        }
                    }
                }
            }
        }
        Ok(inv)
    }

    /// Condition number in the sup operator norm.
    pub fn condition(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.op_norm_inf() * inv.op_norm_inf(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.k {
                self.data.swap(a * self.k + j, b * self.k + j);
            }
        }
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.k, self.k, &self.data)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.k + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.k + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.k, rhs.k, "matrix dimensions differ");
        let k = self.k;
        let mut out = Matrix::zeros(k);
        for i in 0..k {
            for l in 0..k {
                let a = self[(i, l)];
                if a != 0.0 {
                    for j in 0..k {
                        out[(i, j)] += a * rhs[(l, j)];
                    }
                }
            }
        }
        out
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.k).map(|i| self.row(i)))
            .finish()
    }
}

/// Sup-norm distance `max_ij |g_ij - h_ij|`, the working metric on `SL(k, R)`.
pub fn matrix_metric(g: &Matrix, h: &Matrix) -> Result<f64> {
    if g.dim() != h.dim() {
        return Err(LabError::DimensionMismatch {
            expected: g.dim(),
            got: h.dim(),
        });
    }
    Ok(g.sub(h).sup_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let i = Matrix::identity(3);
        assert_eq!(matrix_metric(&i, &i).unwrap(), 0.0);
        let mut h = Matrix::identity(3);
        h[(0, 1)] = 0.3;
        assert_eq!(matrix_metric(&i, &h).unwrap(), 0.3);
        assert!(matrix_metric(&i, &Matrix::identity(2)).is_err());
    }

    #[test]
    fn det_and_inverse() {
        let m = Matrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!((m.det() - 1.0).abs() < 1e-15);
        let p = &m * &m.inverse().unwrap();
        assert!(p.distance_from_identity() < 1e-15);
    }

    #[test]
    fn singular_inverse_fails() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(m.inverse().is_err());
        assert_eq!(m.condition(), f64::INFINITY);
    }
}
