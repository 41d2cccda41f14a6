//! Regret, information gain, and across-seed summaries.

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::mini_meta::RunResult;
use crate::posterior::UniqueHistory;
use crate::scalar::Scalar;

/// z-value of the two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    /// `f* - f(x_t)` on noiseless values.
    pub instantaneous: Vec<f64>,
    /// `R_t`.
    pub cumulative: Vec<f64>,
    /// `R_t / t`.
    pub average: Vec<f64>,
    /// `R_t / t` divided by the uniform policy's expected per-step regret.
    pub normalized: Vec<f64>,
}

impl RegretTrace {
    pub fn final_average(&self) -> f64 {
        self.average.last().copied().unwrap_or(0.0)
    }

    pub fn final_normalized(&self) -> f64 {
        self.normalized.last().copied().unwrap_or(0.0)
    }

    pub fn final_cumulative(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Regret of the chosen indices against the grid optimum of `env`.
pub fn compute_regret<T: Scalar>(result: &RunResult<T>, env: &Environment<T>) -> RegretTrace {
    let fstar = env.true_optimum().1.as_f64();
    let reference = env.uniform_average_regret();
    let n = result.choices.len();
    let mut trace = RegretTrace {
        instantaneous: Vec::with_capacity(n),
        cumulative: Vec::with_capacity(n),
        average: Vec::with_capacity(n),
        normalized: Vec::with_capacity(n),
    };
    let mut total = 0.0;
    for (t, &c) in result.choices.iter().enumerate() {
        let r = (fstar - env.value(c).as_f64()).max(0.0);
        total += r;
        let avg = total / (t + 1) as f64;
        trace.instantaneous.push(r);
        trace.cumulative.push(total);
        trace.average.push(avg);
        trace.normalized.push(if reference > 0.0 { avg / reference } else { 0.0 });
    }
    trace
}

/// `½ log det(I + ξ⁻² W^½ K W^½)`, equal to `½ log det(I + ξ⁻² K_t)` on the
/// expanded history.
pub fn info_gain<T: Scalar>(history: &UniqueHistory<T>, kernel: &KernelSpec<T>, xi: T) -> Result<T> {
    if !(xi > T::zero()) {
        return Err(Error::config(format!("noise level xi must be positive, got {xi}")));
    }
    Ok(T::lit(0.5) * history.weighted_log_det(kernel, xi * xi)?)
}

/// Upper bound on the number of epochs: `4C²/(C²-1) · (1 + κ²/λ) · γ_T`.
pub fn switch_bound(c: f64, kappa_sq: f64, lambda: f64, gamma: f64) -> f64 {
    let c2 = c * c;
    4.0 * c2 / (c2 - 1.0) * (1.0 + kappa_sq / lambda) * gamma
}

/// Per-step series of one run, the input to [`summarize`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSeries {
    pub normalized_regret: Vec<f64>,
    pub unique: Vec<f64>,
    pub switches: Vec<f64>,
    pub elapsed: Vec<f64>,
}

impl RunSeries {
    pub fn new<T: Scalar>(result: &RunResult<T>, regret: &RegretTrace) -> Self {
        RunSeries {
            normalized_regret: regret.normalized.clone(),
            unique: result.unique_counts.iter().map(|&q| q as f64).collect(),
            switches: result.epoch_counts.iter().map(|&h| h as f64).collect(),
            elapsed: result.elapsed.clone(),
        }
    }
}

/// Across-seed mean and 95% normal-approximation half-width, per step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Band {
    pub mean: Vec<f64>,
    pub half_width: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub seeds: usize,
    pub steps: usize,
    pub normalized_regret: Band,
    pub unique: Band,
    pub switches: Band,
    pub elapsed: Band,
}

impl Summary {
    pub fn final_normalized_regret(&self) -> f64 {
        self.normalized_regret.mean.last().copied().unwrap_or(f64::NAN)
    }
}

/// Mean and `1.96 · sd / √n` (sample sd) for each series at each step.
pub fn summarize(runs: &[RunSeries]) -> Result<Summary> {
    if runs.len() < 2 {
        return Err(Error::config(format!("summary needs at least 2 runs, got {}", runs.len())));
    }
    let steps = runs[0].normalized_regret.len();
    if let Some(bad) = runs.iter().find(|r| {
        r.normalized_regret.len() != steps
            || r.unique.len() != steps
            || r.switches.len() != steps
            || (!r.elapsed.is_empty() && r.elapsed.len() != steps)
    }) {
        return Err(Error::DimensionMismatch {
            expected: steps,
            found: bad.normalized_regret.len(),
        });
    }
    let timed = runs.iter().all(|r| r.elapsed.len() == steps);
    Ok(Summary {
        seeds: runs.len(),
        steps,
        normalized_regret: band(runs, steps, |r| &r.normalized_regret),
        unique: band(runs, steps, |r| &r.unique),
        switches: band(runs, steps, |r| &r.switches),
        elapsed: if timed { band(runs, steps, |r| &r.elapsed) } else { Band::default() },
    })
}

fn band(runs: &[RunSeries], steps: usize, pick: impl Fn(&RunSeries) -> &Vec<f64>) -> Band {
    let n = runs.len() as f64;
    let mut out = Band {
        mean: Vec::with_capacity(steps),
        half_width: Vec::with_capacity(steps),
    };
    for t in 0..steps {
        let mean = runs.iter().map(|r| pick(r)[t]).sum::<f64>() / n;
        let var = runs.iter().map(|r| (pick(r)[t] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        out.mean.push(mean);
        out.half_width.push(Z95 * var.sqrt() / n.sqrt());
    }
    out
}
