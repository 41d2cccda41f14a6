//! Experiment configuration, read from TOML.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mini_gp::ObjectiveFamily;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HarnessError, Result};

/// The shipped default: the full synthetic protocol.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/synthetic.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    MiniGpUcb,
    MiniGpEi,
    GpUcb,
    EpsilonGreedy,
    Uniform,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::MiniGpUcb,
        Algorithm::MiniGpEi,
        Algorithm::GpUcb,
        Algorithm::EpsilonGreedy,
        Algorithm::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MiniGpUcb => "mini-gp-ucb",
            Algorithm::MiniGpEi => "mini-gp-ei",
            Algorithm::GpUcb => "gp-ucb",
            Algorithm::EpsilonGreedy => "epsilon-greedy",
            Algorithm::Uniform => "uniform",
        }
    }

    pub fn is_mini(self) -> bool {
        matches!(self, Algorithm::MiniGpUcb | Algorithm::MiniGpEi)
    }

    pub fn uses_gp(self) -> bool {
        matches!(self, Algorithm::MiniGpUcb | Algorithm::MiniGpEi | Algorithm::GpUcb)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm '{s}'")))
    }
}

/// β rule for the UCB variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UcbRule {
    Bayesian,
    Frequentist,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum LambdaMode {
    Oracle,
    Explicit { value: f64 },
}

impl Default for LambdaMode {
    fn default() -> Self {
        LambdaMode::Oracle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    #[serde(serialize_with = "ser_families", deserialize_with = "de_families")]
    pub objectives: Vec<ObjectiveFamily>,
    pub dim: usize,
    pub points_per_dim: usize,
    pub lower: f64,
    pub upper: f64,
    /// Noise std as a fraction of the objective's range over the grid.
    pub noise: f64,
    #[serde(default = "yes")]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperGrid {
    pub bandwidth_sq: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default = "unit_scale")]
    pub beta_scale: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_norm_bound")]
    pub norm_bound: f64,
    #[serde(default = "default_ucb_rule")]
    pub ucb_rule: UcbRule,
    #[serde(default)]
    pub epsilon_a: Vec<f64>,
    #[serde(default)]
    pub epsilon_b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub steps: usize,
    /// Explicit seeds; when empty, seeds `0..seed_count` are used.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub seed_count: Option<usize>,
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub plots: bool,
    pub algorithms: Vec<Algorithm>,
    pub environment: EnvironmentSpec,
    #[serde(default)]
    pub lambda: LambdaMode,
    pub hyper: HyperGrid,
}

/// Command-line overrides applied on top of a file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed_count: Option<usize>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub lambda: Option<f64>,
    pub xi: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn default_protocol() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(n) = o.seed_count {
            self.seeds.clear();
            self.seed_count = Some(n);
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(dir) = &o.out_dir {
            self.output_dir = dir.clone();
        }
        if let Some(value) = o.lambda {
            self.lambda = LambdaMode::Explicit { value };
        }
        if let Some(xi) = o.xi {
            self.environment.noise = xi;
        }
        self.validate()
    }

    pub fn resolved_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..self.seed_count.unwrap_or(0) as u64).collect()
        } else {
            self.seeds.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !self.seeds.is_empty() && self.seed_count.is_some() {
            return bad("give either seeds or seed_count, not both".into());
        }
        let seeds = self.resolved_seeds();
        if seeds.is_empty() {
            return bad("no seeds configured".into());
        }
        if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms configured".into());
        }
        if self.algorithms.iter().collect::<HashSet<_>>().len() != self.algorithms.len() {
            return bad("algorithms listed twice".into());
        }

        let env = &self.environment;
        if env.objectives.is_empty() {
            return bad("no objectives configured".into());
        }
        if env.dim == 0 || env.points_per_dim < 2 || !(env.lower < env.upper) {
            return bad("grid needs dim >= 1, points_per_dim >= 2 and lower < upper".into());
        }
        if !(env.noise >= 0.0) {
            return bad(format!("noise must be nonnegative, got {}", env.noise));
        }
        if let LambdaMode::Explicit { value } = self.lambda {
            if !(value > 0.0) {
                return bad(format!("explicit lambda must be positive, got {value}"));
            }
        } else if env.noise == 0.0 && self.algorithms.iter().any(|a| a.uses_gp()) {
            return bad("oracle lambda is zero for noiseless environments; set lambda explicitly".into());
        }

        let h = &self.hyper;
        let gp = self.algorithms.iter().any(|a| a.uses_gp());
        if gp && (h.bandwidth_sq.is_empty() || h.bandwidth_sq.iter().any(|&b| !(b > 0.0))) {
            return bad("bandwidth_sq must be a non-empty list of positive values".into());
        }
        if gp && (h.beta_scale.is_empty() || h.beta_scale.iter().any(|&s| !(s > 0.0))) {
            return bad("beta_scale must be a non-empty list of positive values".into());
        }
        let mini = self.algorithms.iter().any(|a| a.is_mini());
        if mini && (h.c.is_empty() || h.c.iter().any(|&c| !(c > 1.0))) {
            return bad("c must be a non-empty list of values above 1".into());
        }
        if !(h.delta > 0.0 && h.delta < 1.0) || !(h.norm_bound >= 0.0) {
            return bad("delta must lie in (0, 1) and norm_bound must be nonnegative".into());
        }
        if self.algorithms.contains(&Algorithm::EpsilonGreedy) {
            let pos = |v: &[f64]| !v.is_empty() && v.iter().all(|&x| x > 0.0);
            if !pos(&h.epsilon_a) || !pos(&h.epsilon_b) {
                return bad("epsilon_a and epsilon_b must be non-empty lists of positive values".into());
            }
        }
        Ok(())
    }
}

/// λ for a homoscedastic environment: the 90th percentile of the
/// per-candidate reward standard deviations, squared.
pub fn oracle_lambda(per_candidate_std: &[f64]) -> f64 {
    if per_candidate_std.is_empty() {
        return 0.0;
    }
    let mut s = per_candidate_std.to_vec();
    s.sort_by(f64::total_cmp);
    // nearest-rank percentile
    let rank = ((0.9 * s.len() as f64).ceil() as usize).clamp(1, s.len());
    let p90 = s[rank - 1];
    p90 * p90
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

fn unit_scale() -> Vec<f64> {
    vec![1.0]
}

fn default_delta() -> f64 {
    0.1
}

fn default_norm_bound() -> f64 {
    1.0
}

fn default_ucb_rule() -> UcbRule {
    UcbRule::Bayesian
}

fn ser_families<S: Serializer>(v: &[ObjectiveFamily], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|f| f.name()))
}

fn de_families<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ObjectiveFamily>, D::Error> {
    let names = Vec::<String>::deserialize(d)?;
    names
        .iter()
        .map(|n| n.parse().map_err(serde::de::Error::custom))
        .collect()
}
