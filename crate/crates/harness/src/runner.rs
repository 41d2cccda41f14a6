//! Executes combinations × seeds and collects per-run digests.

use mini_gp::metrics::{switch_bound, RunSeries};
use mini_gp::{
    compute_regret, info_gain, run_epsilon_greedy, run_gp_ucb, run_mini, run_uniform, BetaRule, BetaSchedule,
    CandidateGrid, Environment, EpsilonSchedule, KernelSpec, MiniMetaConfig, ObjectiveFamily, Policy, RegretTrace,
    RunResult, UniqueHistory,
};
use serde::{Deserialize, Serialize};

use crate::config::{oracle_lambda, Algorithm, ExperimentConfig, LambdaMode, UcbRule};
use crate::error::{HarnessError, Result};
use crate::sweep::{Combination, Params};

/// An objective's environment plus the λ used for its GP runs.
#[derive(Debug, Clone)]
pub struct Testbed {
    pub env: Environment<f64>,
    pub lambda: f64,
}

impl Testbed {
    pub fn build(cfg: &ExperimentConfig, family: ObjectiveFamily) -> Result<Self> {
        let e = &cfg.environment;
        let grid = CandidateGrid::build(e.dim, e.points_per_dim, e.lower, e.upper)?;
        let env = Environment::with_relative_noise(grid, family, e.noise, e.normalize)?;
        let lambda = match cfg.lambda {
            LambdaMode::Explicit { value } => value,
            LambdaMode::Oracle => oracle_lambda(&vec![env.objective().noise_std; env.len()]),
        };
        Ok(Testbed { env, lambda })
    }

    pub fn noise_std(&self) -> f64 {
        self.env.objective().noise_std
    }
}

/// Lemma-style check `h ≤ 4C²/(C²−1)·(1+κ²/λ)·γ_T` for one batched run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub switches: usize,
    pub unique: usize,
    pub gamma: f64,
    pub bound: f64,
    pub holds: bool,
}

/// One finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub combination: usize,
    pub seed: u64,
    pub result: RunResult<f64>,
    pub regret: RegretTrace,
    pub bound: Option<BoundCheck>,
}

impl RunOutcome {
    pub fn series(&self) -> RunSeries {
        RunSeries::new(&self.result, &self.regret)
    }

    pub fn elapsed(&self) -> f64 {
        self.result.elapsed.last().copied().unwrap_or(0.0)
    }
}

pub fn policy_for(cfg: &ExperimentConfig, algorithm: Algorithm, beta_scale: f64, card: usize) -> Result<Policy<f64>> {
    let h = &cfg.hyper;
    Ok(match algorithm {
        Algorithm::MiniGpEi => Policy::ei(BetaSchedule::new(BetaRule::FrequentistEi { delta: h.delta }, beta_scale)?),
        _ => {
            let rule = match h.ucb_rule {
                UcbRule::Bayesian => BetaRule::BayesianUcb { card, delta: h.delta },
                UcbRule::Frequentist => BetaRule::FrequentistUcb {
                    norm_bound: h.norm_bound,
                    delta: h.delta,
                },
            };
            Policy::ucb(BetaSchedule::new(rule, beta_scale)?)
        }
    })
}

/// Runs one (combination, seed) task.
pub fn execute(cfg: &ExperimentConfig, bed: &Testbed, combo: &Combination, seed: u64) -> Result<RunOutcome> {
    let env = &bed.env;
    let steps = cfg.steps;
    let (result, bound) = match combo.params {
        Params::Gp {
            bandwidth_sq,
            c,
            beta_scale,
        } => {
            let kernel = KernelSpec::gaussian_from_sq(bandwidth_sq)?;
            let policy = policy_for(cfg, combo.algorithm, beta_scale, env.len())?;
            match c {
                Some(c) => {
                    let config = MiniMetaConfig {
                        kernel,
                        policy,
                        lambda: bed.lambda,
                        c,
                        budget: steps,
                    };
                    let r = run_mini(env, &config, seed)?;
                    let check = check_switch_bound(&r, env, &kernel, c, bed.lambda)?;
                    (r, check)
                }
                None => (run_gp_ucb(env, kernel, policy, bed.lambda, steps, seed)?, None),
            }
        }
        Params::Epsilon { a, b } => (run_epsilon_greedy(env, EpsilonSchedule::new(a, b)?, steps, seed)?, None),
        Params::None => (run_uniform(env, steps, seed)?, None),
    };
    let regret = compute_regret(&result, env);
    Ok(RunOutcome {
        combination: combo.index,
        seed,
        result,
        regret,
        bound,
    })
}

/// Rebuilds the final unique history of a run and checks the switch bound
/// with `γ_T` taken at the environment's noise level. `None` when noiseless.
pub fn check_switch_bound(
    run: &RunResult<f64>,
    env: &Environment<f64>,
    kernel: &KernelSpec<f64>,
    c: f64,
    lambda: f64,
) -> Result<Option<BoundCheck>> {
    let xi = env.objective().noise_std;
    if !(xi > 0.0) {
        return Ok(None);
    }
    let history = final_history(run, env)?;
    let gamma = info_gain(&history, kernel, xi)?;
    let bound = switch_bound(c, kernel.kappa_sq(), lambda, gamma);
    let switches = run.switches();
    let unique = run.final_unique();
    Ok(Some(BoundCheck {
        switches,
        unique,
        gamma,
        bound,
        holds: switches as f64 <= bound && unique <= switches,
    }))
}

pub fn final_history(run: &RunResult<f64>, env: &Environment<f64>) -> Result<UniqueHistory<f64>> {
    let mut h = UniqueHistory::new(env.grid().dim());
    for e in &run.epochs {
        let s = e.start_step - 1;
        let fb = run
            .rewards
            .get(s..s + e.batch_length)
            .ok_or_else(|| HarnessError::Config("epoch trace does not cover the run".into()))?;
        h.add(e.candidate, env.grid().point(e.candidate), fb)?;
    }
    Ok(h)
}
