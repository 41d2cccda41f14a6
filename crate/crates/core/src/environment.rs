//! Finite candidate grids and noisy synthetic objectives.
//!
//! Learners maximize `f(x) = -raw(x) / scale`; each evaluation adds i.i.d.
//! `N(0, ξ²)` noise.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Default cap on `p^d` for [`CandidateGrid::build`].
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// A point of the decision set.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub index: usize,
    pub coords: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub dim: usize,
    pub points_per_dim: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Finite decision set; rows of `coords` are candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid<T> {
    coords: Matrix<T>,
    lattice: Option<Lattice>,
}

impl<T: Scalar> CandidateGrid<T> {
    /// Evenly spaced `p^d` lattice on `[lo, hi]^d`, endpoints included,
    /// enumerated row-major (last coordinate fastest).
    pub fn build(d: usize, p: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::build_with_cap(d, p, lo, hi, DEFAULT_GRID_CAP)
    }

    pub fn build_with_cap(d: usize, p: usize, lo: f64, hi: f64, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::config("grid dimension must be at least 1"));
        }
        if p < 2 {
            return Err(Error::config("grid needs at least 2 points per dimension"));
        }
        if !(lo < hi) {
            return Err(Error::config(format!("grid bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        let size = (0..d)
            .try_fold(1usize, |acc, _| acc.checked_mul(p))
            .filter(|&n| n <= cap)
            .ok_or_else(|| Error::config(format!("grid {p}^{d} exceeds the cap of {cap} candidates")))?;
        let axis: Vec<T> = (0..p)
            .map(|m| T::lit(lo + (hi - lo) * m as f64 / (p - 1) as f64))
            .collect();
        let lattice = Lattice {
            dim: d,
            points_per_dim: p,
            lower: lo,
            upper: hi,
        };
        let mut data = Vec::with_capacity(size * d);
        let mut multi = vec![0usize; d];
        for i in 0..size {
            lattice.multi_index_into(i, &mut multi);
            data.extend(multi.iter().map(|&m| axis[m]));
        }
        Ok(CandidateGrid {
            coords: Matrix::from_row_major(size, d, data)?,
            lattice: Some(lattice),
        })
    }

    /// Arbitrary finite candidate set.
    pub fn from_points(coords: Matrix<T>) -> Result<Self> {
        if coords.nrows() == 0 {
            return Err(Error::EmptyCandidateSet);
        }
        Ok(CandidateGrid {
            coords,
            lattice: None,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> &Matrix<T> {
        &self.coords
    }

    pub fn point(&self, index: usize) -> &[T] {
        self.coords.row(index)
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn candidate(&self, index: usize) -> Result<Candidate<T>> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(Candidate {
            index,
            coords: self.point(index).to_vec(),
        })
    }
}

impl Lattice {
    pub fn multi_index(&self, index: usize) -> Vec<usize> {
        let mut m = vec![0; self.dim];
        self.multi_index_into(index, &mut m);
        m
    }

    fn multi_index_into(&self, mut index: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.points_per_dim;
            index /= self.points_per_dim;
        }
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .fold(0, |acc, &m| acc * self.points_per_dim + m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveFamily {
    Ellipsoid,
    Rastrigin,
    Rosenbrock,
    Schaffer,
}

impl ObjectiveFamily {
    pub const ALL: [ObjectiveFamily; 4] = [
        ObjectiveFamily::Ellipsoid,
        ObjectiveFamily::Rastrigin,
        ObjectiveFamily::Rosenbrock,
        ObjectiveFamily::Schaffer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveFamily::Ellipsoid => "ellipsoid",
            ObjectiveFamily::Rastrigin => "rastrigin",
            ObjectiveFamily::Rosenbrock => "rosenbrock",
            ObjectiveFamily::Schaffer => "schaffer",
        }
    }

    /// The benchmark function itself (to be minimized).
    pub fn raw_value<T: Scalar>(self, x: &[T]) -> T {
        let d = x.len();
        match self {
            ObjectiveFamily::Ellipsoid => x
                .iter()
                .enumerate()
                .map(|(k, &xk)| {
                    let expo = if d > 1 { 6.0 * k as f64 / (d - 1) as f64 } else { 0.0 };
                    T::lit(10f64.powf(expo)) * xk * xk
                })
                .sum(),
            ObjectiveFamily::Rastrigin => {
                let ten = T::lit(10.0);
                let two_pi = T::lit(2.0 * PI);
                ten * T::from_usize(d).unwrap()
                    + x.iter()
                        .map(|&xk| xk * xk - ten * (two_pi * xk).cos())
                        .sum::<T>()
            }
            ObjectiveFamily::Rosenbrock => x
                .windows(2)
                .map(|w| {
                    let a = w[1] - w[0] * w[0];
                    let b = T::one() - w[0];
                    T::lit(100.0) * a * a + b * b
                })
                .sum(),
            ObjectiveFamily::Schaffer => x
                .windows(2)
                .map(|w| {
                    let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
                    let inner = (T::lit(50.0) * s.powf(T::lit(0.1))).sin();
                    s.powf(T::lit(0.25)) * (inner * inner + T::one())
                })
                .sum(),
        }
    }
}

impl fmt::Display for ObjectiveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config(format!("unknown objective '{s}'")))
    }
}

/// Noisy objective presented to the learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective<T> {
    pub family: ObjectiveFamily,
    /// Standard deviation ξ of the additive Gaussian noise.
    pub noise_std: T,
    /// Divisor applied to the negated raw value (1 = unscaled).
    pub output_scale: T,
}

impl<T: Scalar> Objective<T> {
    pub fn new(family: ObjectiveFamily, noise_std: T) -> Result<Self> {
        if !(noise_std >= T::zero()) {
            return Err(Error::config(format!("noise std must be nonnegative, got {noise_std}")));
        }
        Ok(Objective {
            family,
            noise_std,
            output_scale: T::one(),
        })
    }

    pub fn with_output_scale(mut self, scale: T) -> Result<Self> {
        if !(scale > T::zero()) {
            return Err(Error::config(format!("output scale must be positive, got {scale}")));
        }
        self.output_scale = scale;
        Ok(self)
    }

    pub fn raw_value(&self, x: &[T]) -> T {
        self.family.raw_value(x)
    }

    /// Noiseless learner-facing value `-raw(x) / scale`.
    pub fn value(&self, x: &[T]) -> T {
        -self.raw_value(x) / self.output_scale
    }

    /// One noisy evaluation; consumes exactly one standard-normal draw.
    pub fn evaluate<R: Rng + ?Sized>(&self, grid: &CandidateGrid<T>, index: usize, rng: &mut R) -> T {
        let z: f64 = rng.sample(StandardNormal);
        self.value(grid.point(index)) + self.noise_std * T::lit(z)
    }
}

/// `max - min` of the raw benchmark over the grid.
pub fn raw_range<T: Scalar>(family: ObjectiveFamily, grid: &CandidateGrid<T>) -> T {
    let (lo, hi) = grid
        .coords()
        .rows_iter()
        .map(|x| family.raw_value(x))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Grid plus objective with the noiseless values precomputed.
#[derive(Debug, Clone)]
pub struct Environment<T> {
    grid: CandidateGrid<T>,
    objective: Objective<T>,
    values: Vec<T>,
    optimum: (usize, T),
}

impl<T: Scalar> Environment<T> {
    pub fn new(grid: CandidateGrid<T>, objective: Objective<T>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyCandidateSet);
        }
        let values: Vec<T> = grid.coords().rows_iter().map(|x| objective.value(x)).collect();
        let optimum = true_optimum(&values);
        Ok(Environment {
            grid,
            objective,
            values,
            optimum,
        })
    }

    /// Environment whose learner-facing values are divided by the raw range
    /// over the grid (when `normalize`), with noise std equal to
    /// `relative_noise` times the learner-facing range.
    pub fn with_relative_noise(
        grid: CandidateGrid<T>,
        family: ObjectiveFamily,
        relative_noise: T,
        normalize: bool,
    ) -> Result<Self> {
        let range = raw_range(family, &grid);
        let scale = if normalize && range > T::zero() { range } else { T::one() };
        let objective = Objective::new(family, relative_noise * range / scale)?.with_output_scale(scale)?;
        Self::new(grid, objective)
    }

    pub fn grid(&self) -> &CandidateGrid<T> {
        &self.grid
    }

    pub fn objective(&self) -> &Objective<T> {
        &self.objective
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Noiseless `f` at a grid index.
    pub fn value(&self, index: usize) -> T {
        self.values[index]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn evaluate<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> T {
        let z: f64 = rng.sample(StandardNormal);
        self.values[index] + self.objective.noise_std * T::lit(z)
    }

    /// Best grid index (lowest on ties) and `f*`.
    pub fn true_optimum(&self) -> (usize, T) {
        self.optimum
    }

    /// Expected per-step regret of uniform random selection, `f* - mean f`.
    pub fn uniform_average_regret(&self) -> f64 {
        let fstar = self.optimum.1.as_f64();
        let mean = self.values.iter().map(|v| v.as_f64()).sum::<f64>() / self.values.len() as f64;
        fstar - mean
    }
}

fn true_optimum<T: Scalar>(values: &[T]) -> (usize, T) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn paper_grid_shape() {
        let g = CandidateGrid::<f64>::build(3, 22, -5.0, 5.0).unwrap();
        assert_eq!(g.len(), 10648);
        assert_eq!(g.point(0), &[-5.0, -5.0, -5.0]);
        assert_eq!(g.point(10647), &[5.0, 5.0, 5.0]);
        let lat = g.lattice().unwrap();
        for i in [0, 1, 21, 22, 485, 10647] {
            assert_eq!(lat.flat_index(&lat.multi_index(i)), i);
        }
    }

    #[test]
    fn small_grids() {
        let g = CandidateGrid::<f64>::build(1, 2, -5.0, 5.0).unwrap();
        assert_eq!(g.coords().as_slice(), &[-5.0, 5.0]);
        let g = CandidateGrid::<f64>::build(2, 3, -5.0, 5.0).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(4), &[0.0, 0.0]);
    }

    #[test]
    fn grid_errors() {
        assert!(CandidateGrid::<f64>::build(3, 1, -5.0, 5.0).is_err());
        assert!(CandidateGrid::<f64>::build(3, 4, 5.0, 5.0).is_err());
        assert!(CandidateGrid::<f64>::build(7, 22, -5.0, 5.0).is_err());
        assert!(CandidateGrid::<f64>::build_with_cap(2, 10, 0.0, 1.0, 99).is_err());
        assert!(CandidateGrid::<f64>::build(64, 22, 0.0, 1.0).is_err());
    }

    #[test]
    fn benchmark_minima() {
        use ObjectiveFamily::*;
        assert_eq!(Rastrigin.raw_value(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(Rosenbrock.raw_value(&[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(Ellipsoid.raw_value(&[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(Ellipsoid.raw_value(&[0.0, 0.0, 1.0]), 1e6);
        assert_eq!(Schaffer.raw_value(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn noiseless_evaluation_is_negated_raw() {
        let g = CandidateGrid::<f64>::build(2, 3, -1.0, 1.0).unwrap();
        let obj = Objective::new(ObjectiveFamily::Rosenbrock, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..g.len() {
            assert_eq!(obj.evaluate(&g, i, &mut rng), -obj.raw_value(g.point(i)));
        }
    }

    #[test]
    fn fresh_streams_repeat() {
        let g = CandidateGrid::<f64>::build(2, 3, -1.0, 1.0).unwrap();
        let env = Environment::new(g, Objective::new(ObjectiveFamily::Ellipsoid, 0.3).unwrap()).unwrap();
        let a = env.evaluate(4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = env.evaluate(4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn single_point_optimum() {
        let g = CandidateGrid::from_points(Matrix::from_rows(&[vec![0.3, 0.1]]).unwrap()).unwrap();
        let env = Environment::new(g, Objective::new(ObjectiveFamily::Rastrigin, 0.0).unwrap()).unwrap();
        assert_eq!(env.true_optimum().0, 0);
    }

    #[test]
    fn family_names_round_trip() {
        for f in ObjectiveFamily::ALL {
            assert_eq!(f.name().parse::<ObjectiveFamily>().unwrap(), f);
        }
        assert!("sphere".parse::<ObjectiveFamily>().is_err());
    }
}
