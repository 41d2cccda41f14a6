//! Gaussian-process optimization over a finite candidate set.
//!
//! The posterior is kept over the *unique* evaluated candidates, each carrying
//! its evaluation count, which is an exact rewrite of the usual posterior over
//! the full (repeated) evaluation history. The [`mini_meta`] loop keeps the
//! number of unique candidates small by committing to one candidate for a
//! whole batch of evaluations, with batch lengths chosen from the posterior
//! variance so the within-batch uncertainty never shrinks by more than a
//! factor `C`.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision instantiation.

pub mod acquisition;
pub mod baselines;
pub mod environment;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod mini_meta;
pub mod posterior;
mod scalar;

pub use acquisition::{
    ei_score, select_candidate, ucb_score, Acquisition, BetaRule, BetaSchedule, Policy, Selection,
};
pub use baselines::{run_epsilon_greedy, run_gp_ucb, run_uniform, EpsilonSchedule};
pub use environment::{Candidate, CandidateGrid, Environment, Objective, ObjectiveFamily};
pub use error::{Error, Result};
pub use kernel::{KernelFamily, KernelSpec};
pub use linalg::{Cholesky, Matrix};
pub use metrics::{compute_regret, info_gain, summarize, RegretTrace, Summary};
pub use mini_meta::{batch_length, run_mini, EpochTrace, MiniMeta, MiniMetaConfig, Proposal, RunResult};
pub use posterior::{naive_posterior, PosteriorModel, Prediction, UniqueHistory};
pub use scalar::Scalar;

pub type Matrix64 = Matrix<f64>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type UniqueHistory64 = UniqueHistory<f64>;
pub type PosteriorModel64 = PosteriorModel<f64>;
pub type BetaSchedule64 = BetaSchedule<f64>;
pub type Policy64 = Policy<f64>;
pub type Environment64 = Environment<f64>;
pub type CandidateGrid64 = CandidateGrid<f64>;
pub type RunResult64 = RunResult<f64>;
pub type MiniMetaConfig64 = MiniMetaConfig<f64>;

pub type Matrix32 = Matrix<f32>;
pub type PosteriorModel32 = PosteriorModel<f32>;
pub type RunResult32 = RunResult<f32>;
