//! Dense row-major matrices and a Cholesky factorization.
//!
//! Only what the posterior needs: the systems are small (q x q with q the
//! number of unique candidates), so plain loops over contiguous rows are
//! enough.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix. Rows of point matrices are points.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Appends a row, fixing the column count on the first push into an empty matrix.
    pub fn push_row(&mut self, row: &[T]) -> Result<()> {
        if self.rows == 0 && self.cols == 0 {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky<T> {
    factor: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a symmetric positive-definite matrix. Only the lower triangle of
    /// `a` is read.
    pub fn factor(a: &Matrix<T>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            for k in 0..j {
                let (lk, lj) = (l.row(k), l.row(j));
                let s = dot(&lk[..k], &lj[..k]);
                let v = (a[(j, k)] - s) / l[(k, k)];
                l[(j, k)] = v;
            }
            let lj = l.row(j);
            let d = a[(j, j)] - dot(&lj[..j], &lj[..j]);
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            l[(j, j)] = d.sqrt();
        }
        Ok(Cholesky { factor: l })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.factor
    }

    /// Solves `L z = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let l = &self.factor;
        for j in 0..b.len() {
            let row = l.row(j);
            let mut s = b[j];
            for k in 0..j {
                s = s - row[k] * b[k];
            }
            b[j] = s / row[j];
        }
    }

    /// Solves `Lᵀ z = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [T]) {
        let l = &self.factor;
        let n = b.len();
        for j in (0..n).rev() {
            let mut s = b[j];
            for k in j + 1..n {
                s = s - l[(k, j)] * b[k];
            }
            b[j] = s / l[(j, j)];
        }
    }

    /// Solves `A z = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        self.solve_lower_in_place(b);
        self.solve_upper_in_place(b);
    }

    /// `log det A = 2 Σ log L_ii`.
    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        two * (0..self.dim())
            .map(|i| self.factor[(i, i)].ln())
            .sum::<T>()
    }

    /// `L Lᵀ`, for checking the factorization.
    pub fn reconstruct(&self) -> Matrix<T> {
        let l = &self.factor;
        l.matmul(&l.transpose()).expect("square factor")
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        s = s + x * y;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd3() -> Matrix<f64> {
        Matrix::from_rows(&[
            vec![4.0, 12.0, -16.0],
            vec![12.0, 37.0, -43.0],
            vec![-16.0, -43.0, 98.0],
        ])
        .unwrap()
    }

    #[test]
    fn known_factor() {
        let c = Cholesky::factor(&spd3()).unwrap();
        let expected = [[2.0, 0.0, 0.0], [6.0, 1.0, 0.0], [-8.0, 5.0, 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((c.lower()[(i, j)] - expected[i][j]).abs() < 1e-12);
            }
        }
        // det = (2*1*3)^2 = 36
        assert!((c.log_det() - 36f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn solve_round_trip() {
        let a = spd3();
        let c = Cholesky::factor(&a).unwrap();
        let x = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3).map(|i| dot(a.row(i), &x)).collect();
        c.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(x) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn reports_failing_pivot() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(
            Cholesky::factor(&a).unwrap_err(),
            Error::NotPositiveDefinite { pivot: 1 }
        );
    }

    #[test]
    fn nan_is_not_positive_definite() {
        let a = Matrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(matches!(
            Cholesky::factor(&a),
            Err(Error::NotPositiveDefinite { pivot: 0 })
        ));
    }

    #[test]
    fn empty_factor() {
        let c = Cholesky::factor(&Matrix::<f64>::zeros(0, 0)).unwrap();
        assert_eq!(c.dim(), 0);
        assert_eq!(c.log_det(), 0.0);
    }

    #[test]
    fn push_row_checks_width() {
        let mut m = Matrix::<f64>::zeros(0, 0);
        m.push_row(&[1.0, 2.0]).unwrap();
        m.push_row(&[3.0, 4.0]).unwrap();
        assert_eq!(m.nrows(), 2);
        assert!(m.push_row(&[1.0]).is_err());
    }
}
