//! Comparison policies: sequential GP-UCB, ε-greedy, and uniform random.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acquisition::Policy;
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::mini_meta::{drive, EpochTrace, MiniMeta, RunResult};
use crate::scalar::Scalar;

/// Sequential GP optimization: refit and reselect after every evaluation.
/// Repeated candidates still merge in the unique history.
pub fn run_gp_ucb<T: Scalar>(
    env: &Environment<T>,
    kernel: KernelSpec<T>,
    policy: Policy<T>,
    lambda: T,
    budget: usize,
    seed: u64,
) -> Result<RunResult<T>> {
    let clock = Instant::now();
    let engine = MiniMeta::sequential(env.grid(), kernel, policy, lambda, budget)?;
    drive(engine, env, seed, clock)
}

/// `ε_t = min(1, a / t^b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub a: f64,
    pub b: f64,
}

impl EpsilonSchedule {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::config(format!("epsilon schedule needs a, b > 0, got a={a}, b={b}")));
        }
        Ok(EpsilonSchedule { a, b })
    }

    pub fn epsilon(&self, t: u64) -> f64 {
        (self.a / (t.max(1) as f64).powf(self.b)).min(1.0)
    }
}

/// Generator for policy randomness; noise uses stream 0 of the same seed.
fn policy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn unit_epoch<T: Scalar>(step: usize, candidate: usize) -> EpochTrace<T> {
    EpochTrace {
        epoch: step,
        candidate,
        batch_length: 1,
        start_step: step,
        variance_at_selection: T::nan(),
        scaled_variance: T::nan(),
        beta: T::nan(),
        logdet_at_fit: T::nan(),
        clamped: false,
        truncated: false,
    }
}

fn check_budget(budget: usize) -> Result<()> {
    if budget == 0 {
        return Err(Error::config("step budget must be at least 1"));
    }
    Ok(())
}

/// With probability `ε_t` explore uniformly; otherwise play the evaluated
/// candidate with the highest empirical mean reward (lowest index on ties).
/// The first step always explores.
pub fn run_epsilon_greedy<T: Scalar>(
    env: &Environment<T>,
    eps: EpsilonSchedule,
    budget: usize,
    seed: u64,
) -> Result<RunResult<T>> {
    check_budget(budget)?;
    let clock = Instant::now();
    let n = env.len();
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    let mut pol = policy_rng(seed);
    let mut sums = vec![0.0f64; n];
    let mut counts = vec![0u64; n];
    let mut seen: Vec<usize> = Vec::new();
    let mut out = RunResult::with_capacity(budget);
    for step in 1..=budget {
        let u: f64 = pol.random();
        let choice = if seen.is_empty() || u < eps.epsilon(step as u64) {
            pol.random_range(0..n)
        } else {
            best_empirical(&seen, &sums, &counts)
        };
        let y = env.evaluate(choice, &mut noise);
        if counts[choice] == 0 {
            seen.push(choice);
        }
        counts[choice] += 1;
        sums[choice] += y.as_f64();
        out.push_step(choice, y, seen.len(), step, clock.elapsed().as_secs_f64());
        out.epochs.push(unit_epoch(step, choice));
    }
    Ok(out)
}

fn best_empirical(seen: &[usize], sums: &[f64], counts: &[u64]) -> usize {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for &i in seen {
        let m = sums[i] / counts[i] as f64;
        if m > best.1 || (m == best.1 && i < best.0) {
            best = (i, m);
        }
    }
    best.0
}

/// Uniform i.i.d. selection; the normalization reference for regret.
pub fn run_uniform<T: Scalar>(env: &Environment<T>, budget: usize, seed: u64) -> Result<RunResult<T>> {
    check_budget(budget)?;
    let clock = Instant::now();
    let n = env.len();
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    let mut pol = policy_rng(seed);
    let mut seen = vec![false; n];
    let mut unique = 0;
    let mut out = RunResult::with_capacity(budget);
    for step in 1..=budget {
        let choice = pol.random_range(0..n);
        let y = env.evaluate(choice, &mut noise);
        if !seen[choice] {
            seen[choice] = true;
            unique += 1;
        }
        out.push_step(choice, y, unique, step, clock.elapsed().as_secs_f64());
        out.epochs.push(unit_epoch(step, choice));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{CandidateGrid, Objective, ObjectiveFamily};
    use crate::linalg::Matrix;

    #[test]
    fn epsilon_examples() {
        let e = EpsilonSchedule::new(1.0, 0.5).unwrap();
        assert_eq!(e.epsilon(1), 1.0);
        let e = EpsilonSchedule::new(0.1, 2.0).unwrap();
        assert!((e.epsilon(10) - 0.001).abs() < 1e-15);
        let e = EpsilonSchedule::new(10.0, 1.0 / 3.0).unwrap();
        assert_eq!(e.epsilon(1), 1.0);
        assert!(EpsilonSchedule::new(0.0, 1.0).is_err());
        assert!(EpsilonSchedule::new(1.0, -1.0).is_err());
    }

    #[test]
    fn epsilon_non_increasing() {
        for &(a, b) in &[(0.1, 1.0 / 3.0), (1.0, 0.5), (10.0, 1.0), (10.0, 2.0)] {
            let e = EpsilonSchedule::new(a, b).unwrap();
            let mut prev = 1.0;
            for t in 1..500 {
                let v = e.epsilon(t);
                assert!(v > 0.0 && v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn uniform_single_candidate() {
        let g = CandidateGrid::from_points(Matrix::from_rows(&[vec![0.0]]).unwrap()).unwrap();
        let env = Environment::new(g, Objective::new(ObjectiveFamily::Rastrigin, 1.0).unwrap()).unwrap();
        let r = run_uniform(&env, 50, 4).unwrap();
        assert!(r.choices.iter().all(|&c| c == 0));
        assert_eq!(r.final_unique(), 1);
    }

    #[test]
    fn budget_must_be_positive() {
        let g = CandidateGrid::<f64>::build(1, 3, 0.0, 1.0).unwrap();
        let env = Environment::new(g, Objective::new(ObjectiveFamily::Rastrigin, 0.0).unwrap()).unwrap();
        assert!(run_uniform(&env, 0, 0).is_err());
        assert!(run_epsilon_greedy(&env, EpsilonSchedule::new(1.0, 1.0).unwrap(), 0, 0).is_err());
    }
}
