//! Low-switching epoch loop.
//!
//! Each epoch picks one candidate by maximizing the acquisition on the current
//! posterior, evaluates it `B_h = ⌊(C² - 1) / σ̃²(x)⌋` times (at least once,
//! never past the step budget), where `σ̃² = σ²/λ` is the posterior variance in
//! units of the regularizer. One more evaluation at `x_s` divides the variance
//! anywhere by at most `1 + σ̃²(x_s)`, so this length keeps every posterior
//! standard deviation within a factor `C` of its value at the epoch start.
//! All `B_h` feedbacks are folded into the unique history at once, followed by
//! a single refit. Nothing inside an epoch depends on the
//! epoch's own feedback, so the `B_h` evaluations can run as one batch.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{select_with_cache, KernelColumns, Policy};
use crate::environment::{CandidateGrid, Environment};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::posterior::{PosteriorModel, UniqueHistory};
use crate::scalar::Scalar;

/// `min(remaining, max(1, ⌊(C² - 1) / variance⌋))`.
pub fn batch_length<T: Scalar>(variance: T, c: T, remaining: usize) -> Result<usize> {
    Ok(raw_batch_length(variance, c)?.clamp(1, remaining.max(1)))
}

/// The unclamped `⌊(C² - 1) / variance⌋`, saturating at `usize::MAX`.
fn raw_batch_length<T: Scalar>(variance: T, c: T) -> Result<usize> {
    if !(c > T::one()) {
        return Err(Error::config(format!("switching threshold C must exceed 1, got {c}")));
    }
    if !(variance > T::zero()) {
        return Ok(usize::MAX);
    }
    let ratio = ((c * c - T::one()) / variance).floor().as_f64();
    Ok(if ratio >= usize::MAX as f64 { usize::MAX } else { ratio as usize })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiniMetaConfig<T> {
    pub kernel: KernelSpec<T>,
    pub policy: Policy<T>,
    pub lambda: T,
    /// Switching threshold `C > 1`.
    pub c: T,
    /// Total number of evaluations `T`.
    pub budget: usize,
}

impl<T: Scalar> MiniMetaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > T::one()) {
            return Err(Error::config(format!("switching threshold C must exceed 1, got {}", self.c)));
        }
        if !(self.lambda > T::zero()) {
            return Err(Error::config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.budget == 0 {
            return Err(Error::config("step budget must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochTrace<T> {
    /// 1-based epoch number `h`.
    pub epoch: usize,
    pub candidate: usize,
    pub batch_length: usize,
    /// 1-based step of the first evaluation in the epoch.
    pub start_step: usize,
    /// Posterior variance `σ²(x)` of the chosen candidate.
    pub variance_at_selection: T,
    /// `σ²(x) / λ`, the quantity the batch length is computed from.
    pub scaled_variance: T,
    pub beta: T,
    pub logdet_at_fit: T,
    /// `⌊(C² - 1)/σ̃²⌋` was below one and got raised to one.
    pub clamped: bool,
    /// The batch was cut short by the step budget.
    pub truncated: bool,
}

/// What the loop will do next: evaluate `candidate` `batch_length` times.
pub type Proposal<T> = EpochTrace<T>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Batching<T> {
    Variance { c: T },
    Single,
}

/// Ask/tell driver of the epoch loop.
///
/// [`propose`](Self::propose) is a pure function of the history observed so
/// far; [`observe`](Self::observe) takes the whole batch of feedback and refits.
#[derive(Debug, Clone)]
pub struct MiniMeta<'g, T> {
    grid: &'g CandidateGrid<T>,
    kernel: KernelSpec<T>,
    policy: Policy<T>,
    lambda: T,
    batching: Batching<T>,
    budget: usize,
    history: UniqueHistory<T>,
    model: PosteriorModel<T>,
    cache: KernelColumns<T>,
    steps: usize,
    epochs: Vec<EpochTrace<T>>,
}

impl<'g, T: Scalar> MiniMeta<'g, T> {
    pub fn new(grid: &'g CandidateGrid<T>, config: &MiniMetaConfig<T>) -> Result<Self> {
        config.validate()?;
        Self::build(
            grid,
            config.kernel,
            config.policy,
            config.lambda,
            Batching::Variance { c: config.c },
            config.budget,
        )
    }

    /// One evaluation per epoch and a refit after every step: plain
    /// sequential GP optimization.
    pub fn sequential(
        grid: &'g CandidateGrid<T>,
        kernel: KernelSpec<T>,
        policy: Policy<T>,
        lambda: T,
        budget: usize,
    ) -> Result<Self> {
        if budget == 0 {
            return Err(Error::config("step budget must be at least 1"));
        }
        Self::build(grid, kernel, policy, lambda, Batching::Single, budget)
    }

    fn build(
        grid: &'g CandidateGrid<T>,
        kernel: KernelSpec<T>,
        policy: Policy<T>,
        lambda: T,
        batching: Batching<T>,
        budget: usize,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyCandidateSet);
        }
        let history = UniqueHistory::new(grid.dim());
        let model = PosteriorModel::fit(&history, kernel, lambda)?;
        Ok(MiniMeta {
            grid,
            kernel,
            policy,
            lambda,
            batching,
            budget,
            history,
            model,
            cache: KernelColumns::new(),
            steps: 0,
            epochs: Vec::new(),
        })
    }

    pub fn steps_done(&self) -> usize {
        self.steps
    }

    pub fn remaining(&self) -> usize {
        self.budget - self.steps
    }

    pub fn is_done(&self) -> bool {
        self.steps >= self.budget
    }

    pub fn history(&self) -> &UniqueHistory<T> {
        &self.history
    }

    pub fn model(&self) -> &PosteriorModel<T> {
        &self.model
    }

    pub fn epochs(&self) -> &[EpochTrace<T>] {
        &self.epochs
    }

    /// Next epoch's candidate and batch length, or `None` once the budget is spent.
    pub fn propose(&self) -> Result<Option<Proposal<T>>> {
        if self.is_done() {
            return Ok(None);
        }
        let t = self.steps as u64 + 1;
        let sel = select_with_cache(self.grid, &self.model, &self.policy, t, &self.cache)?;
        let remaining = self.remaining();
        let scaled_variance = sel.variance / self.lambda;
        let (batch_length, clamped, truncated) = match self.batching {
            Batching::Variance { c } => {
                let raw = raw_batch_length(scaled_variance, c)?;
                (raw.clamp(1, remaining), raw < 1, raw > remaining)
            }
            Batching::Single => (1, false, false),
        };
        Ok(Some(EpochTrace {
            epoch: self.epochs.len() + 1,
            candidate: sel.index,
            batch_length,
            start_step: self.steps + 1,
            variance_at_selection: sel.variance,
            scaled_variance,
            beta: sel.beta,
            logdet_at_fit: self.model.log_det_weighted(),
            clamped,
            truncated,
        }))
    }

    /// Merges the epoch's feedback and refits the posterior.
    pub fn observe(&mut self, proposal: &Proposal<T>, feedbacks: &[T]) -> Result<()> {
        if feedbacks.len() != proposal.batch_length {
            return Err(Error::DimensionMismatch {
                expected: proposal.batch_length,
                found: feedbacks.len(),
            });
        }
        if proposal.start_step != self.steps + 1 || proposal.epoch != self.epochs.len() + 1 {
            return Err(Error::config("proposal does not continue the current history"));
        }
        if proposal.batch_length > self.remaining() {
            return Err(Error::config("batch exceeds the remaining step budget"));
        }
        let coords = self.grid.point(proposal.candidate);
        self.history.add(proposal.candidate, coords, feedbacks)?;
        self.model = PosteriorModel::fit(&self.history, self.kernel, self.lambda)?;
        self.cache.sync(self.grid, &self.model);
        self.steps += feedbacks.len();
        self.epochs.push(*proposal);
        Ok(())
    }
}

/// Per-step record of one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T> {
    pub choices: Vec<usize>,
    pub rewards: Vec<T>,
    pub epochs: Vec<EpochTrace<T>>,
    /// Unique candidates `q_t` after each step.
    pub unique_counts: Vec<usize>,
    /// Epochs started `h_t` by each step.
    pub epoch_counts: Vec<usize>,
    /// Seconds since the loop started, at each step's evaluation.
    pub elapsed: Vec<f64>,
}

impl<T: Scalar> RunResult<T> {
    pub(crate) fn with_capacity(n: usize) -> Self {
        RunResult {
            choices: Vec::with_capacity(n),
            rewards: Vec::with_capacity(n),
            epochs: Vec::new(),
            unique_counts: Vec::with_capacity(n),
            epoch_counts: Vec::with_capacity(n),
            elapsed: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Number of epochs `h` at the end of the run.
    pub fn switches(&self) -> usize {
        self.epoch_counts.last().copied().unwrap_or(0)
    }

    pub fn final_unique(&self) -> usize {
        self.unique_counts.last().copied().unwrap_or(0)
    }

    /// Same run with the wall-clock column removed, for comparisons.
    pub fn without_timing(&self) -> Self {
        RunResult {
            elapsed: Vec::new(),
            ..self.clone()
        }
    }

    pub(crate) fn push_step(&mut self, choice: usize, reward: T, unique: usize, epoch: usize, elapsed: f64) {
        self.choices.push(choice);
        self.rewards.push(reward);
        self.unique_counts.push(unique);
        self.epoch_counts.push(epoch);
        self.elapsed.push(elapsed);
    }
}

/// Drives a [`MiniMeta`] against `env`, drawing feedback in step order from a
/// generator seeded with `seed`.
pub(crate) fn drive<T: Scalar>(
    mut engine: MiniMeta<'_, T>,
    env: &Environment<T>,
    seed: u64,
    clock: Instant,
) -> Result<RunResult<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RunResult::with_capacity(engine.budget);
    let mut feedback = Vec::new();
    while let Some(p) = engine.propose()? {
        feedback.clear();
        let unique = engine.history().len() + usize::from(engine.history().row_of(p.candidate).is_none());
        for _ in 0..p.batch_length {
            let y = env.evaluate(p.candidate, &mut rng);
            feedback.push(y);
            out.push_step(p.candidate, y, unique, p.epoch, clock.elapsed().as_secs_f64());
        }
        engine.observe(&p, &feedback)?;
    }
    out.epochs = engine.epochs;
    Ok(out)
}

/// Runs the low-switching loop for `config.budget` evaluations.
pub fn run_mini<T: Scalar>(env: &Environment<T>, config: &MiniMetaConfig<T>, seed: u64) -> Result<RunResult<T>> {
    let clock = Instant::now();
    let engine = MiniMeta::new(env.grid(), config)?;
    drive(engine, env, seed, clock)
}
