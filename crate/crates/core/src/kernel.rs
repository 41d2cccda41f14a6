//! Bounded positive-definite kernels.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// `exp(-‖x - y‖² / (2 σ²))`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    family: KernelFamily,
    bandwidth: T,
    // -1 / (2 σ²), cached
    neg_inv_two_bw_sq: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn gaussian(bandwidth: T) -> Result<Self> {
        if !(bandwidth > T::zero()) || !bandwidth.is_finite() {
            return Err(Error::config(format!(
                "kernel bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(KernelSpec {
            family: KernelFamily::Gaussian,
            bandwidth,
            neg_inv_two_bw_sq: -T::one() / (T::lit(2.0) * bandwidth * bandwidth),
        })
    }

    /// Builds a Gaussian kernel from the squared bandwidth σ², the form the
    /// hyperparameter grids are written in.
    pub fn gaussian_from_sq(bandwidth_sq: T) -> Result<Self> {
        if !(bandwidth_sq > T::zero()) {
            return Err(Error::config(format!(
                "squared kernel bandwidth must be positive, got {bandwidth_sq}"
            )));
        }
        Self::gaussian(bandwidth_sq.sqrt())
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn bandwidth(&self) -> T {
        self.bandwidth
    }

    /// Upper bound κ² on `k(x, x)`.
    pub fn kappa_sq(&self) -> T {
        match self.family {
            KernelFamily::Gaussian => T::one(),
        }
    }

    /// `k(x, x)`; constant for stationary kernels.
    #[inline]
    pub fn diag(&self, _x: &[T]) -> T {
        match self.family {
            KernelFamily::Gaussian => T::one(),
        }
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// [`eval`](Self::eval) without the length check; callers guarantee equal
    /// dimensions.
    #[inline]
    pub fn eval_unchecked(&self, x: &[T], y: &[T]) -> T {
        let mut d2 = T::zero();
        for (&a, &b) in x.iter().zip(y) {
            let d = a - b;
            d2 = d2 + d * d;
        }
        match self.family {
            KernelFamily::Gaussian => (d2 * self.neg_inv_two_bw_sq).exp(),
        }
    }

    /// `k(X, Y)`, one row per point of `x`.
    pub fn matrix(&self, x: &Matrix<T>, y: &Matrix<T>) -> Result<Matrix<T>> {
        if x.ncols() != y.ncols() && x.nrows() > 0 && y.nrows() > 0 {
            return Err(Error::DimensionMismatch {
                expected: x.ncols(),
                found: y.ncols(),
            });
        }
        let mut out = Matrix::zeros(x.nrows(), y.nrows());
        for i in 0..x.nrows() {
            let xi = x.row(i);
            for (j, o) in out.row_mut(i).iter_mut().enumerate() {
                *o = self.eval_unchecked(xi, y.row(j));
            }
        }
        Ok(out)
    }

    /// `k(x, X)` for every row of `points`, written into `out`.
    pub fn row_into(&self, x: &[T], points: &Matrix<T>, out: &mut Vec<T>) {
        out.clear();
        out.extend(points.rows_iter().map(|p| self.eval_unchecked(x, p)));
    }
}
