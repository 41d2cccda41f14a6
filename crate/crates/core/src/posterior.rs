//! GP posterior over unique candidates with multiplicity weights.
//!
//! A history of `t` evaluations that touched only `q` distinct candidates is
//! stored as `q` rows, each with its evaluation count `w_i` and the sum of its
//! feedbacks. With `W = diag(w)` and `K = k(X_q, X_q)` the posterior is
//!
//! ```text
//! μ(x)  = k(x, X_q) W^½ (W^½ K W^½ + λI)⁻¹ W^-½ y_sum
//! σ²(x) = k(x, x) - k(x, X_q) W^½ (W^½ K W^½ + λI)⁻¹ W^½ k(X_q, x)
//! ```
//!
//! which is identical to the standard GP posterior on the expanded `t`-row
//! history (not an approximation). Fitting costs O(q³) and each query O(q²),
//! independent of `t`.

use std::collections::HashMap;

use crate::environment::Candidate;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{dot, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Evaluation history with duplicates merged by candidate index.
#[derive(Debug, Clone, PartialEq)]
pub struct UniqueHistory<T> {
    points: Matrix<T>,
    grid_indices: Vec<usize>,
    counts: Vec<u64>,
    feedback_sum: Vec<T>,
    total_steps: u64,
    index_of: HashMap<usize, usize>,
}

impl<T: Scalar> UniqueHistory<T> {
    pub fn new(dim: usize) -> Self {
        UniqueHistory {
            points: Matrix::zeros(0, dim),
            grid_indices: Vec::new(),
            counts: Vec::new(),
            feedback_sum: Vec::new(),
            total_steps: 0,
            index_of: HashMap::new(),
        }
    }

    /// Records `feedbacks.len()` evaluations of one candidate. A candidate seen
    /// before has its count and feedback sum grown in place; otherwise a new
    /// unique row is appended.
    pub fn add(&mut self, grid_index: usize, coords: &[T], feedbacks: &[T]) -> Result<()> {
        if feedbacks.is_empty() {
            return Err(Error::config("history_add needs at least one feedback"));
        }
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        let total = feedbacks.iter().copied().sum::<T>();
        let n = feedbacks.len() as u64;
        match self.index_of.get(&grid_index) {
            Some(&row) => {
                self.counts[row] += n;
                self.feedback_sum[row] = self.feedback_sum[row] + total;
            }
            None => {
                self.index_of.insert(grid_index, self.grid_indices.len());
                self.points.push_row(coords)?;
                self.grid_indices.push(grid_index);
                self.counts.push(n);
                self.feedback_sum.push(total);
            }
        }
        self.total_steps += n;
        Ok(())
    }

    pub fn add_candidate(&mut self, candidate: &Candidate<T>, feedbacks: &[T]) -> Result<()> {
        self.add(candidate.index, &candidate.coords, feedbacks)
    }

    /// Number of unique candidates `q`.
    pub fn len(&self) -> usize {
        self.grid_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid_indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn points(&self) -> &Matrix<T> {
        &self.points
    }

    pub fn grid_indices(&self) -> &[usize] {
        &self.grid_indices
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn feedback_sums(&self) -> &[T] {
        &self.feedback_sum
    }

    /// Row of `grid_index` in the unique table, if it has been evaluated.
    pub fn row_of(&self, grid_index: usize) -> Option<usize> {
        self.index_of.get(&grid_index).copied()
    }

    fn sqrt_weights(&self) -> Vec<T> {
        self.counts
            .iter()
            .map(|&c| T::from_u64(c).expect("count fits scalar").sqrt())
            .collect()
    }

    /// `W^½ K W^½ + reg·I`.
    pub fn weighted_system(&self, kernel: &KernelSpec<T>, reg: T) -> Matrix<T> {
        let q = self.len();
        let sw = self.sqrt_weights();
        let mut a = Matrix::zeros(q, q);
        for i in 0..q {
            let xi = self.points.row(i);
            for j in 0..=i {
                let v = sw[i] * kernel.eval_unchecked(xi, self.points.row(j)) * sw[j];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            a[(i, i)] = a[(i, i)] + reg;
        }
        a
    }

    /// `log det(W^½ K W^½ / reg + I)`.
    pub fn weighted_log_det(&self, kernel: &KernelSpec<T>, reg: T) -> Result<T> {
        check_reg(reg)?;
        let chol = Cholesky::factor(&self.weighted_system(kernel, reg))?;
        Ok(scaled_log_det(&chol, reg))
    }
}

fn check_reg<T: Scalar>(reg: T) -> Result<()> {
    if !(reg > T::zero()) || !reg.is_finite() {
        return Err(Error::config(format!(
            "regularization must be positive and finite, got {reg}"
        )));
    }
    Ok(())
}

fn scaled_log_det<T: Scalar>(chol: &Cholesky<T>, reg: T) -> T {
    let q = T::from_usize(chol.dim()).expect("dimension fits scalar");
    (chol.log_det() - q * reg.ln()).max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }
}

/// Factorized posterior; immutable once fitted.
#[derive(Debug, Clone)]
pub struct PosteriorModel<T> {
    kernel: KernelSpec<T>,
    lambda: T,
    history: UniqueHistory<T>,
    sqrt_w: Vec<T>,
    chol: Cholesky<T>,
    mean_weights: Vec<T>,
}

impl<T: Scalar> PosteriorModel<T> {
    /// Fits the posterior on `history` in O(q³). An empty history gives the prior.
    pub fn fit(history: &UniqueHistory<T>, kernel: KernelSpec<T>, lambda: T) -> Result<Self> {
        check_reg(lambda)?;
        let sqrt_w = history.sqrt_weights();
        let chol = Cholesky::factor(&history.weighted_system(&kernel, lambda))?;
        // α = W^½ A⁻¹ W^-½ y_sum, so that μ(x) = k(x, X) α
        let mut z: Vec<T> = history
            .feedback_sum
            .iter()
            .zip(&sqrt_w)
            .map(|(&y, &s)| y / s)
            .collect();
        chol.solve_in_place(&mut z);
        let mean_weights = z.iter().zip(&sqrt_w).map(|(&v, &s)| v * s).collect();
        Ok(PosteriorModel {
            kernel,
            lambda,
            history: history.clone(),
            sqrt_w,
            chol,
            mean_weights,
        })
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn history(&self) -> &UniqueHistory<T> {
        &self.history
    }

    pub fn factor(&self) -> &Cholesky<T> {
        &self.chol
    }

    pub fn mean_weights(&self) -> &[T] {
        &self.mean_weights
    }

    /// `W^½ K W^½ + λI` as factorized.
    pub fn system_matrix(&self) -> Matrix<T> {
        self.history.weighted_system(&self.kernel, self.lambda)
    }

    pub fn mean(&self, x: &[T]) -> Result<T> {
        Ok(self.predict(x)?.mean)
    }

    pub fn variance(&self, x: &[T]) -> Result<T> {
        Ok(self.predict(x)?.variance)
    }

    pub fn predict(&self, x: &[T]) -> Result<Prediction<T>> {
        if x.len() != self.history.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.history.dim(),
                found: x.len(),
            });
        }
        let mut krow = Vec::with_capacity(self.history.len());
        self.kernel.row_into(x, &self.history.points, &mut krow);
        self.predict_from_kernel_row(&krow, self.kernel.diag(x))
    }

    /// Mean and variance from a precomputed `k(x, X_q)` row and `k(x, x)`.
    pub fn predict_from_kernel_row(&self, krow: &[T], kxx: T) -> Result<Prediction<T>> {
        let mean = dot(krow, &self.mean_weights);
        let mut v: Vec<T> = krow.iter().zip(&self.sqrt_w).map(|(&k, &s)| k * s).collect();
        self.chol.solve_lower_in_place(&mut v);
        let variance = finish_variance(kxx, v.iter().fold(T::zero(), |s, &e| s + e * e))?;
        Ok(Prediction { mean, variance })
    }

    /// Predictions for candidates `start..start + means.len()` given kernel
    /// columns `columns[j][i] = k(candidate_i, X_q[j])`.
    ///
    /// Results are bit-identical to [`predict_from_kernel_row`](Self::predict_from_kernel_row)
    /// on the same inputs; the block form only changes the loop nesting.
    pub fn predict_columns(
        &self,
        columns: &[Vec<T>],
        kxx: T,
        start: usize,
        means: &mut [T],
        variances: &mut [T],
    ) -> Result<()> {
        let q = self.history.len();
        if columns.len() < q {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: columns.len(),
            });
        }
        let n = means.len();
        debug_assert_eq!(n, variances.len());
        means.fill(T::zero());
        // block[j * n + c] = (L⁻¹ W^½ k_c)_j, filled row by row
        let mut block = vec![T::zero(); q * n];
        let l = self.chol.lower();
        for j in 0..q {
            let col = &columns[j][start..start + n];
            let (alpha, sw) = (self.mean_weights[j], self.sqrt_w[j]);
            let (done, rest) = block.split_at_mut(j * n);
            let cur = &mut rest[..n];
            for c in 0..n {
                means[c] = means[c] + col[c] * alpha;
                cur[c] = col[c] * sw;
            }
            let lrow = l.row(j);
            for k in 0..j {
                let lk = lrow[k];
                let prev = &done[k * n..(k + 1) * n];
                for c in 0..n {
                    cur[c] = cur[c] - lk * prev[c];
                }
            }
            let ljj = lrow[j];
            for v in cur.iter_mut() {
                *v = *v / ljj;
            }
        }
        for c in 0..n {
            let mut s = T::zero();
            for j in 0..q {
                let e = block[j * n + c];
                s = s + e * e;
            }
            variances[c] = finish_variance(kxx, s)?;
        }
        Ok(())
    }

    /// `log det(W^½ K W^½ / λ + I)`; zero for the prior.
    pub fn log_det_weighted(&self) -> T {
        scaled_log_det(&self.chol, self.lambda)
    }
}

fn finish_variance<T: Scalar>(kxx: T, explained: T) -> Result<T> {
    let var = kxx - explained;
    if var >= T::zero() {
        Ok(var)
    } else if var >= -T::variance_slack() {
        Ok(T::zero())
    } else {
        Err(Error::NegativeVariance {
            value: var.as_f64(),
        })
    }
}

/// Standard GP posterior `(μ(x), σ²(x))` on the full, repeated history
/// `points` / `feedback` using `(K_t + λI)⁻¹`. O(t³) per call: reference only.
pub fn naive_posterior<T: Scalar>(
    points: &Matrix<T>,
    feedback: &[T],
    kernel: &KernelSpec<T>,
    lambda: T,
    x: &[T],
) -> Result<(T, T)> {
    check_reg(lambda)?;
    let t = points.nrows();
    if feedback.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            found: feedback.len(),
        });
    }
    let kxx = kernel.diag(x);
    if t == 0 {
        return Ok((T::zero(), kxx));
    }
    if x.len() != points.ncols() {
        return Err(Error::DimensionMismatch {
            expected: points.ncols(),
            found: x.len(),
        });
    }
    let mut gram = kernel.matrix(points, points)?;
    for i in 0..t {
        gram[(i, i)] = gram[(i, i)] + lambda;
    }
    let chol = Cholesky::factor(&gram)?;
    let mut kx = Vec::with_capacity(t);
    kernel.row_into(x, points, &mut kx);
    let mut a = feedback.to_vec();
    chol.solve_in_place(&mut a);
    let mean = dot(&kx, &a);
    let mut b = kx.clone();
    chol.solve_in_place(&mut b);
    let var = kxx - dot(&kx, &b);
    Ok((mean, var.max(T::zero())))
}
