//! Acquisition scores, exploration schedules, and exact maximization over a
//! finite candidate set.

use std::f64::consts::PI;

use crate::environment::CandidateGrid;
use crate::error::{Error, Result};
use crate::posterior::PosteriorModel;
use crate::scalar::Scalar;

/// Exploration multiplier β as a function of the information proxy and step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule<T> {
    /// `√(logdet + log(1/δ)) + F`, `F` a bound on the RKHS norm of `f`.
    FrequentistUcb { norm_bound: T, delta: T },
    /// `√(2 log(|A| t² π² / (6δ)))`.
    BayesianUcb { card: usize, delta: T },
    /// `√(logdet + √(logdet·log(t/δ)) + log(t/δ))`.
    FrequentistEi { delta: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSchedule<T> {
    pub rule: BetaRule<T>,
    /// Constant multiplier on the frequentist rules.
    pub scale: T,
}

impl<T: Scalar> BetaSchedule<T> {
    pub fn new(rule: BetaRule<T>, scale: T) -> Result<Self> {
        let delta = match rule {
            BetaRule::FrequentistUcb { norm_bound, delta } => {
                if !(norm_bound >= T::zero()) {
                    return Err(Error::config("norm bound F must be nonnegative"));
                }
                delta
            }
            BetaRule::BayesianUcb { card, delta } => {
                if card == 0 {
                    return Err(Error::config("candidate cardinality must be at least 1"));
                }
                delta
            }
            BetaRule::FrequentistEi { delta } => delta,
        };
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !(scale > T::zero()) {
            return Err(Error::config(format!("beta scale must be positive, got {scale}")));
        }
        Ok(BetaSchedule { rule, scale })
    }

    /// β for step `t ≥ 1` given `logdet = log det(W^½ K W^½/λ + I)`.
    pub fn value(&self, logdet: T, t: u64) -> T {
        let t = T::from_u64(t.max(1)).expect("step fits scalar");
        let logdet = logdet.max(T::zero());
        match self.rule {
            BetaRule::FrequentistUcb { norm_bound, delta } => {
                self.scale * ((logdet - delta.ln()).sqrt() + norm_bound)
            }
            BetaRule::BayesianUcb { card, delta } => {
                let card = T::from_usize(card).expect("cardinality fits scalar");
                let pi2 = T::lit(PI * PI);
                (T::lit(2.0) * (card * t * t * pi2 / (T::lit(6.0) * delta)).ln()).sqrt()
            }
            BetaRule::FrequentistEi { delta } => {
                let lt = (t / delta).ln();
                self.scale * (logdet + (logdet * lt).sqrt() + lt).sqrt()
            }
        }
    }

    /// Whether [`value`](Self::value) reads the log-determinant.
    pub fn uses_logdet(&self) -> bool {
        !matches!(self.rule, BetaRule::BayesianUcb { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Acquisition {
    Ucb,
    Ei,
}

/// Acquisition function paired with its β schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy<T> {
    pub acquisition: Acquisition,
    pub schedule: BetaSchedule<T>,
}

impl<T: Scalar> Policy<T> {
    pub fn ucb(schedule: BetaSchedule<T>) -> Self {
        Policy {
            acquisition: Acquisition::Ucb,
            schedule,
        }
    }

    pub fn ei(schedule: BetaSchedule<T>) -> Self {
        Policy {
            acquisition: Acquisition::Ei,
            schedule,
        }
    }
}

#[inline]
pub fn ucb_score<T: Scalar>(mean: T, std: T, beta: T) -> T {
    mean + beta * std
}

/// Expected-improvement score `β σ [(z/β) Φ(z/β) + φ(z/β)]` with
/// `z = (μ - μ_best) / σ`. For `σ = 0` this is the positive part of the
/// improvement.
pub fn ei_score<T: Scalar>(mean: T, std: T, beta: T, incumbent_mean: T) -> T {
    let gap = mean - incumbent_mean;
    if !(std > T::zero()) {
        return gap.max(T::zero());
    }
    // β σ (z/β) = gap, so the score is gap Φ(u) + β σ φ(u) with u = gap / (β σ)
    let u = gap / (beta * std);
    let uf = u.as_f64();
    let score = gap * T::lit(normal_cdf(uf)) + beta * std * T::lit(normal_pdf(uf));
    score.max(T::zero())
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Index of the largest score; lowest index wins ties, NaN never wins.
pub fn argmax<T: Scalar>(scores: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if s.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection<T> {
    pub index: usize,
    pub score: T,
    pub mean: T,
    pub variance: T,
    pub beta: T,
}

/// Kernel columns `k(A, x_j)` for each unique history row `x_j`, reused across
/// refits. History rows only ever get appended, so the cache grows with them.
#[derive(Debug, Clone, Default)]
pub struct KernelColumns<T> {
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> KernelColumns<T> {
    pub fn new() -> Self {
        KernelColumns { columns: Vec::new() }
    }

    /// Appends columns for history rows not yet cached.
    pub fn sync(&mut self, grid: &CandidateGrid<T>, model: &PosteriorModel<T>) {
        let points = model.history().points();
        let kernel = model.kernel();
        while self.columns.len() < points.nrows() {
            let x = points.row(self.columns.len());
            let col = grid
                .coords()
                .rows_iter()
                .map(|c| kernel.eval_unchecked(c, x))
                .collect();
            self.columns.push(col);
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

const BLOCK: usize = 128;

/// Posterior mean and variance at every candidate.
pub fn predict_all<T: Scalar>(
    grid: &CandidateGrid<T>,
    model: &PosteriorModel<T>,
    cache: &KernelColumns<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = grid.len();
    let (mut means, mut vars) = (vec![T::zero(); n], vec![T::zero(); n]);
    // stationary kernel: k(x, x) is the same for every candidate
    let kxx = model.kernel().diag(grid.point(0));
    let mut start = 0;
    for (mb, vb) in means.chunks_mut(BLOCK).zip(vars.chunks_mut(BLOCK)) {
        model.predict_columns(&cache.columns, kxx, start, mb, vb)?;
        start += mb.len();
    }
    Ok((means, vars))
}

/// Acquisition scores for every candidate, plus the β used.
pub fn score_all<T: Scalar>(
    means: &[T],
    vars: &[T],
    policy: &Policy<T>,
    logdet: T,
    t: u64,
) -> (Vec<T>, T) {
    let beta = policy.schedule.value(logdet, t);
    let scores = match policy.acquisition {
        Acquisition::Ucb => means
            .iter()
            .zip(vars)
            .map(|(&m, &v)| ucb_score(m, v.sqrt(), beta))
            .collect(),
        Acquisition::Ei => {
            let incumbent = means.iter().copied().fold(T::neg_infinity(), T::max);
            means
                .iter()
                .zip(vars)
                .map(|(&m, &v)| ei_score(m, v.sqrt(), beta, incumbent))
                .collect()
        }
    };
    (scores, beta)
}

/// Maximizes the acquisition over the whole candidate set for the next step
/// `t` (1-based), using cached kernel columns.
pub fn select_with_cache<T: Scalar>(
    grid: &CandidateGrid<T>,
    model: &PosteriorModel<T>,
    policy: &Policy<T>,
    t: u64,
    cache: &KernelColumns<T>,
) -> Result<Selection<T>> {
    if grid.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let (means, vars) = predict_all(grid, model, cache)?;
    let logdet = if policy.schedule.uses_logdet() {
        model.log_det_weighted()
    } else {
        T::zero()
    };
    let (scores, beta) = score_all(&means, &vars, policy, logdet, t);
    let index = argmax(&scores).ok_or_else(|| Error::config("all acquisition scores are NaN"))?;
    Ok(Selection {
        index,
        score: scores[index],
        mean: means[index],
        variance: vars[index],
        beta,
    })
}

/// [`select_with_cache`] with a throwaway cache.
pub fn select_candidate<T: Scalar>(
    grid: &CandidateGrid<T>,
    model: &PosteriorModel<T>,
    policy: &Policy<T>,
    t: u64,
) -> Result<Selection<T>> {
    let mut cache = KernelColumns::new();
    cache.sync(grid, model);
    select_with_cache(grid, model, policy, t, &cache)
}
